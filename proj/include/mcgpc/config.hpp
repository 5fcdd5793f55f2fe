#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mcgpc/models.hpp"

namespace mcgpc {

/// Parses `c0 + c1*<variable>` and its permutations (`c1*var - c0`, `var`,
/// a bare number). Any other variable name is rejected.
UncertainScalar parse_affine(std::string_view text, std::string_view variable = "theta");

/// Line-based configuration text.
///
///     # comment
///     key = value            # top-level key
///     [section]
///     key = "quoted value"   # stored as section.key
///
/// Every key must be read exactly once per parse; `check_unused` reports the
/// rest as errors with their line numbers.
class ConfigFile {
 public:
  static ConfigFile parse(std::string_view text, std::string origin = "<config>");
  static ConfigFile load(const std::filesystem::path& path);

  const std::string& origin() const { return origin_; }
  const std::string& text() const { return text_; }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  int line(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  UncertainScalar get_uncertain(const std::string& key, const UncertainScalar& fallback,
                                std::string_view variable) const;

  /// Throws ConfigError for the first key nobody read.
  void check_unused() const;

  /// ConfigError prefixed with `origin:line:` of `key`.
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
    mutable bool used = false;
  };

  const Entry* find(const std::string& key) const;

  std::string origin_;
  std::string text_;
  std::map<std::string, Entry> entries_;
};

/// `1,2,3` or `10,100` into numbers; whitespace allowed.
std::vector<double> parse_number_list(std::string_view text);

}  // namespace mcgpc
