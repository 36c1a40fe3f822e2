#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace lrsetd {

/// Counter-based generator: every draw is a pure function of (seed, stream,
/// counter), so sequences are identical on every platform and independent of
/// call order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(mix(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)))) {}

  /// 64 random bits for position `counter`.
  std::uint64_t bits(std::uint64_t counter) const noexcept { return mix(key_ + 0x9e3779b97f4a7c15ULL * counter); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on positions 2c and 2c+1.
  double normal(std::uint64_t counter) const noexcept {
    const double u1 = 1.0 - uniform(2 * counter);  // (0, 1]
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// splitmix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
};

}  // namespace lrsetd
