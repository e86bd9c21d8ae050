#pragma once

#include <cstdint>

namespace vlbm {

/// splitmix64 finalizer. Published algorithm (Steele et al.), used so that
/// coefficient streams are reproducible bit-for-bit across platforms and
/// implementations.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Counter-based splitmix64 stream.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) via the top 53 bits.
  double next_unit() { return (next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [-1, 1).
  double next_sym() { return 2.0 * next_unit() - 1.0; }

 private:
  std::uint64_t state_;
};

/// Per-sample seed derived from (base_seed, sample index) only, so the
/// stream is independent of grid resolution and any other configuration.
inline std::uint64_t sample_seed(std::uint64_t base_seed, std::uint64_t sample_index) {
  return mix64(base_seed ^ mix64(sample_index + 1));
}

}  // namespace vlbm
