#pragma once

#include <cstdint>
#include <vector>

namespace magic {

/// SplitMix64 generator. All seeded behaviour in the library (pattern
/// dictionary sprays, k-means++ sampling, training shuffles) goes through
/// this one generator so that identical seeds reproduce identical artifacts
/// on any platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 bits of mantissa.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [0, bound). Multiply-shift reduction (Lemire); the tiny bias
  /// is irrelevant here, the fixed mapping is what matters.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t x = next();
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(x) * bound) >> 64);
  }

 private:
  std::uint64_t state_;
};

/// In-place Fisher-Yates shuffle driven by the shared generator.
template <typename T>
void shuffle(std::vector<T>& values, SplitMix64& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace magic
