// Counter-based deterministic random generator.  Every draw is a pure
// function of (seed, counter), so runs are reproducible from the manifest
// regardless of call order or platform library versions; distribution code
// (uniform, Gaussian, SL(2,C) sampling) is written out explicitly for the
// same reason.
#pragma once

#include <cstdint>
#include <cmath>

#include "isolab/algebra.hpp"

namespace isolab {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(detail::splitmix64(seed ^ (stream * 0x9e3779b97f4a7c15ULL))) {}

  std::uint64_t next_u64() {
    return detail::splitmix64(seed_ + 0x632be59bd9b4e019ULL * ++counter_);
  }

  // Uniform in [0, 1) with 53 significant bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (both uniforms drawn fresh).
  double gauss() {
    double u1 = uniform();
    if (u1 <= 0) u1 = 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  C cgauss() { return C(gauss(), gauss()); }

  // Random SL(2,C): Gaussian entries re-scaled to unit determinant with the
  // principal square root.  Resamples when the determinant is too small.
  Mat2c sl2() {
    for (;;) {
      Mat2c m;
      m << cgauss(), cgauss(), cgauss(), cgauss();
      const C d = det2(m);
      if (std::abs(d) < 1e-3) continue;
      return Mat2c(m / std::sqrt(d));
    }
  }

  // Real exponent drawn uniformly from [lo, hi], resampled until its
  // distance to the integers exceeds min_dist.
  double theta_off_int(double lo, double hi, double min_dist) {
    for (;;) {
      const double t = uniform(lo, hi);
      if (std::abs(t - std::round(t)) > min_dist) return t;
    }
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace isolab
