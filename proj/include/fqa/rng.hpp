#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace fqa {

/// Stateless 64-bit mixer (splitmix64). Used to derive independent
/// substream seeds from a base seed and one or more indices.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic seed for substream (index_a, index_b) of `base`.
/// Stable across platforms and worker counts.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index_a,
                                 std::uint64_t index_b = 0) {
  std::uint64_t s = splitmix64(base ^ 0x8d9e3779b97f4a7cULL);
  s = splitmix64(s ^ splitmix64(index_a + 1));
  s = splitmix64(s ^ splitmix64(index_b + 0x51afd7ed558ccd25ULL));
  return s;
}

/// Seeded random source with explicit-formula distributions.
///
/// All draws are defined directly on top of the mt19937_64 bit stream
/// (no std::*_distribution), so a given seed reproduces the same values
/// on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Uniform on [0,1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0,1); never returns 0 so logs and tangents stay finite.
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; consumes exactly two uniforms per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u = uniform_open();
    const double v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double theta = 2.0 * std::numbers::pi * v;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Student-t with 3 degrees of freedom, unit scale: Z / sqrt(V/3), V ~ chi^2_3.
  double student_t3() {
    const double z = normal();
    const double a = normal();
    const double b = normal();
    const double c = normal();
    return z / std::sqrt((a * a + b * b + c * c) / 3.0);
  }

  /// Standard Cauchy via inverse CDF.
  double cauchy() {
    return std::tan(std::numbers::pi * (uniform_open() - 0.5));
  }

  /// Uniform integer in [0, n), n >= 1. Unbiased via rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace fqa
