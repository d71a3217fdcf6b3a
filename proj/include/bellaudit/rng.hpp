#pragma once

#include <cstdint>

namespace bellaudit {

// Counter-based generator used for every stochastic component. The exact
// algorithm is part of the output contract: reruns with the same seed must
// reproduce files bit for bit, on any platform.
//
//   gamma   = 0x9E3779B97F4A7C15 (the 64-bit golden-ratio increment)
//   mix64   = the SplitMix64 finalizer (30/27/31 xor-shift-multiply)
//   stream(seed, k) starts from counter mix64(seed + (k + 1) * gamma)
//   each draw advances the counter by gamma and outputs mix64(counter)
//   doubles take the top 53 bits, giving uniforms in [0, 1)

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t counter) : counter_(counter) {}

  constexpr std::uint64_t next() {
    counter_ += kGoldenGamma;
    return mix64(counter_);
  }

  /// Uniform in [0, 1) with 53-bit resolution.
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t counter_;
};

/// Independent stream for (seed, index). Streams depend only on their own
/// index, so they can be created and consumed in any order.
inline constexpr SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64(mix64(seed + (index + 1) * kGoldenGamma));
}

}  // namespace bellaudit
