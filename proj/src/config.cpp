#include "mcgpc/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mcgpc/errors.hpp"

namespace mcgpc {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool is_identifier_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

UncertainScalar parse_affine(std::string_view text, std::string_view variable) {
  const auto bad = [&](const std::string& why) -> ConfigError {
    return ConfigError("cannot parse '" + std::string(text) + "' as c0 + c1*" + std::string(variable) +
                       ": " + why);
  };
  // Whitespace may only sit next to an operator; "2 3" is not 23.
  std::string compact;
  char pending = 0;
  bool gap = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      gap = true;
      continue;
    }
    const auto is_op = [](char ch) { return ch == '+' || ch == '-' || ch == '*'; };
    if (gap && pending != 0 && !is_op(pending) && !is_op(c)) throw bad("missing operator");
    compact.push_back(c);
    pending = c;
    gap = false;
  }
  if (compact.empty()) throw bad("empty expression");

  double c0 = 0.0;
  double c1 = 0.0;
  std::size_t pos = 0;
  bool first = true;
  while (pos < compact.size()) {
    double sign = 1.0;
    if (compact[pos] == '+' || compact[pos] == '-') {
      sign = compact[pos] == '-' ? -1.0 : 1.0;
      ++pos;
    } else if (!first) {
      throw bad("expected + or - between terms");
    }
    first = false;
    // A term runs to the next +/- that is not an exponent sign.
    std::size_t end = pos;
    while (end < compact.size()) {
      const char c = compact[end];
      if ((c == '+' || c == '-') && end > pos) {
        const char prev = compact[end - 1];
        const bool exponent = (prev == 'e' || prev == 'E') && end >= pos + 2 &&
                              (std::isdigit(static_cast<unsigned char>(compact[end - 2])) ||
                               compact[end - 2] == '.');
        if (!exponent) break;
      }
      ++end;
    }
    const std::string_view term(compact.data() + pos, end - pos);
    if (term.empty()) throw bad("empty term");

    double coeff = 1.0;
    bool has_var = false;
    std::size_t factors = 0;
    std::size_t start = 0;
    while (start <= term.size()) {
      const std::size_t star = term.find('*', start);
      const std::string_view factor =
          term.substr(start, star == std::string_view::npos ? std::string_view::npos : star - start);
      ++factors;
      if (factor.empty()) throw bad("empty factor");
      double number = 0.0;
      if (parse_double(factor, number)) {
        coeff *= number;
      } else if (std::all_of(factor.begin(), factor.end(), is_identifier_char)) {
        if (factor != variable) throw bad("unknown variable '" + std::string(factor) + "'");
        if (has_var) throw bad("only affine expressions are supported");
        has_var = true;
      } else {
        throw bad("invalid factor '" + std::string(factor) + "'");
      }
      if (star == std::string_view::npos) break;
      start = star + 1;
    }
    if (factors > 2) throw bad("too many factors in a term");
    (has_var ? c1 : c0) += sign * coeff;
    pos = end;
  }
  return UncertainScalar(c0, c1);
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string_view item =
        text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    double value = 0.0;
    if (!parse_double(item, value)) {
      throw ConfigError("invalid number '" + std::string(trim(item)) + "' in list '" + std::string(text) + "'");
    }
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

ConfigFile ConfigFile::parse(std::string_view text, std::string origin) {
  ConfigFile cfg;
  cfg.origin_ = std::move(origin);
  cfg.text_ = std::string(text);
  std::string section;
  std::istringstream in(cfg.text_);
  std::string raw;
  int line_no = 0;
  const auto error = [&](const std::string& msg) {
    return ConfigError(cfg.origin_ + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    // Strip comments outside quotes.
    std::string line;
    bool quoted = false;
    for (char c : raw) {
      if (c == '"') quoted = !quoted;
      if (!quoted && (c == '#' || c == ';')) break;
      line.push_back(c);
    }
    if (quoted) throw error("unterminated quote");
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw error("malformed section header");
      const std::string_view name = trim(body.substr(1, body.size() - 2));
      if (name.empty() || !std::all_of(name.begin(), name.end(), is_identifier_char)) {
        throw error("invalid section name '" + std::string(name) + "'");
      }
      section = std::string(name);
      continue;
    }
    const std::size_t eq = body.find('=');
    if (eq == std::string_view::npos) throw error("expected key = value");
    const std::string_view key = trim(body.substr(0, eq));
    std::string_view value = trim(body.substr(eq + 1));
    if (key.empty() || !std::all_of(key.begin(), key.end(), is_identifier_char)) {
      throw error("invalid key '" + std::string(key) + "'");
    }
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    } else if (value.find('"') != std::string_view::npos) {
      throw error("stray quote in value");
    }
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (cfg.entries_.count(full)) throw error("duplicate key '" + full + "'");
    cfg.entries_[full] = Entry{std::string(value), line_no};
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

const ConfigFile::Entry* ConfigFile::find(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  it->second.used = true;
  return &it->second;
}

int ConfigFile::line(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.line;
}

void ConfigFile::fail(const std::string& key, const std::string& message) const {
  const int ln = line(key);
  throw ConfigError(origin_ + (ln > 0 ? ":" + std::to_string(ln) : std::string()) + ": " + key + ": " +
                    message);
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
  const Entry* e = find(key);
  return e ? e->value : fallback;
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  double v = 0.0;
  if (!parse_double(e->value, v)) fail(key, "expected a real number, got '" + e->value + "'");
  return v;
}

std::int64_t ConfigFile::get_int(const std::string& key, std::int64_t fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  // Accept integral reals such as 1e5.
  double v = 0.0;
  if (!parse_double(e->value, v) || v != std::floor(v) || std::abs(v) > 9.0e15) {
    fail(key, "expected an integer, got '" + e->value + "'");
  }
  return static_cast<std::int64_t>(v);
}

std::size_t ConfigFile::get_size(const std::string& key, std::size_t fallback) const {
  const std::int64_t v = get_int(key, static_cast<std::int64_t>(fallback));
  if (v < 0) fail(key, "must be non-negative");
  return static_cast<std::size_t>(v);
}

std::uint64_t ConfigFile::get_u64(const std::string& key, std::uint64_t fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::uint64_t v = 0;
  const std::string_view s = trim(e->value);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(key, "expected an unsigned integer, got '" + e->value + "'");
  }
  return v;
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::string v = e->value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  fail(key, "expected a boolean, got '" + e->value + "'");
}

UncertainScalar ConfigFile::get_uncertain(const std::string& key, const UncertainScalar& fallback,
                                          std::string_view variable) const {
  const Entry* e = find(key);
  if (!e) return fallback;
  try {
    return parse_affine(e->value, variable);
  } catch (const ConfigError& err) {
    fail(key, err.what());
  }
}

void ConfigFile::check_unused() const {
  for (const auto& [key, entry] : entries_) {
    if (!entry.used) {
      throw ConfigError(origin_ + ":" + std::to_string(entry.line) + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace mcgpc
