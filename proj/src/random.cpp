#include "mcgpc/random.hpp"

#include "mcgpc/errors.hpp"

namespace mcgpc {

void sample_without_replacement(KeyedStream& rng, std::uint32_t n, std::uint32_t count,
                                std::span<std::uint32_t> out, std::vector<unsigned char>& marks) {
  if (count > n) throw ConfigError("subsample size exceeds population");
  if (out.size() != count) throw DimensionError("subsample buffer has wrong length");
  if (marks.size() < n) marks.assign(n, 0);

  std::uint32_t filled = 0;
  for (std::uint32_t j = n - count; j < n; ++j) {
    auto t = static_cast<std::uint32_t>(rng.index(static_cast<std::uint64_t>(j) + 1));
    if (marks[t]) t = j;
    marks[t] = 1;
    out[filled++] = t;
  }
  for (std::uint32_t idx : out) marks[idx] = 0;
}

}  // namespace mcgpc
