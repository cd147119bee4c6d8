#pragma once

#include <cstdint>
#include <random>

#include "mfqvar/stats.hpp"

namespace mfq {

/// splitmix64 step; used to derive independent substream seeds from a
/// (seed, index) pair so parallel and serial runs agree.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Deterministic RNG wrapper. Uniforms are built directly from the raw 64-bit
/// output and normals by quantile inversion, so every stream is reproducible
/// bit-for-bit on one platform regardless of the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Substream generator for replicate/grid work item `index`.
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (0xA0761D6478BD642FULL * (index + 1));
    const std::uint64_t mixed = splitmix64(s);
    return Rng(mixed);
  }

  /// Uniform draw in the open interval (0,1).
  double uniform() {
    const std::uint64_t bits = gen_() >> 11;  // 53 random bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() { return norm_quantile(uniform()); }

  std::uint64_t raw() { return gen_(); }

  /// Integer draw in [0, n).
  std::uint64_t below(std::uint64_t n) { return gen_() % n; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace mfq
