#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace mcgpc {

/// SplitMix64 stream keyed by (seed, tag, a, b).
///
/// Every particle, step and purpose gets its own stream, so a parallel loop
/// over particles draws exactly the numbers a serial loop would. The uniform
/// and normal transforms below are written out rather than taken from
/// <random> distributions, whose output is implementation-defined.
class KeyedStream {
 public:
  KeyedStream(std::uint64_t seed, std::uint64_t tag, std::uint64_t a = 0, std::uint64_t b = 0)
      : state_(mix(mix(mix(mix(seed) ^ tag) ^ a) ^ b)) {}

  std::uint64_t next() {
    state_ += kGolden;
    return mix(state_);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), unbiased by rejection.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  /// Standard normal via Box-Muller (one variate per call).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  std::uint64_t state_;
};

/// Stream tags, so different uses of one seed never share a stream.
enum StreamTag : std::uint64_t {
  kTagInitial = 0x11,
  kTagSubsample = 0x22,
};

/// Floyd's algorithm: `count` distinct indices drawn uniformly from [0, n).
///
/// `marks` is caller-owned scratch of size n, all zero on entry and on exit.
void sample_without_replacement(KeyedStream& rng, std::uint32_t n, std::uint32_t count,
                                std::span<std::uint32_t> out, std::vector<unsigned char>& marks);

}  // namespace mcgpc
