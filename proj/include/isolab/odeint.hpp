// Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) for small dense
// complex states.  The state is any fixed-size Eigen matrix; the error
// control is entrywise max-abs with rel = abs = tol.  This is the single
// integrator behind analytic continuation of frames, deformation flows and
// the tau-function quadratures.
#pragma once

#include <algorithm>
#include <cmath>

#include "isolab/algebra.hpp"
#include "isolab/errors.hpp"

namespace isolab {
namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double kDP_c[7] = {0.0,     1.0 / 5, 3.0 / 10, 4.0 / 5,
                                    8.0 / 9, 1.0,     1.0};
inline constexpr double kDP_a2[1] = {1.0 / 5};
inline constexpr double kDP_a3[2] = {3.0 / 40, 9.0 / 40};
inline constexpr double kDP_a4[3] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
inline constexpr double kDP_a5[4] = {19372.0 / 6561, -25360.0 / 2187,
                                     64448.0 / 6561, -212.0 / 729};
inline constexpr double kDP_a6[5] = {9017.0 / 3168, -355.0 / 33,
                                     46732.0 / 5247, 49.0 / 176,
                                     -5103.0 / 18656};
// Fifth-order weights (also row 7 of the tableau; first-same-as-last).
inline constexpr double kDP_b[6] = {35.0 / 384,    0.0,        500.0 / 1113,
                                    125.0 / 192,   -2187.0 / 6784,
                                    11.0 / 84};
// b5 - b4: weights of the embedded error estimate.
inline constexpr double kDP_e[7] = {71.0 / 57600,      0.0,
                                    -71.0 / 16695,     71.0 / 1920,
                                    -17253.0 / 339200, 22.0 / 525,
                                    -1.0 / 40};

template <class MatT>
double state_norm(const MatT& m) {
  return m.cwiseAbs().maxCoeff();
}

// Integrate dy/ds = f(s, y) from s0 to s1 (s0 < s1).  The first accepted
// step is span/64 unless the controller shrinks it.  Throws StepUnderflow
// when the controller collapses below 1e-14 of the span.
template <class MatT, class F>
MatT dopri5(MatT y, F&& f, double s0, double s1, double tol,
            double init_frac = 1.0 / 64) {
  const double span = s1 - s0;
  if (!(span > 0)) throw ConfigError("dopri5: span must be positive");
  double s = s0;
  double h = span * init_frac;
  const double h_min = span * 1e-14;
  MatT k1 = f(s, y);
  while (s < s1) {
    h = std::min(h, s1 - s);
    if (h < h_min)
      throw StepUnderflow("integration step collapsed at s = " +
                          std::to_string(s));
    const MatT k2 = f(s + kDP_c[1] * h, MatT(y + (h * kDP_a2[0]) * k1));
    const MatT k3 = f(s + kDP_c[2] * h,
                      MatT(y + (h * kDP_a3[0]) * k1 + (h * kDP_a3[1]) * k2));
    const MatT k4 =
        f(s + kDP_c[3] * h, MatT(y + (h * kDP_a4[0]) * k1 +
                                 (h * kDP_a4[1]) * k2 + (h * kDP_a4[2]) * k3));
    const MatT k5 =
        f(s + kDP_c[4] * h,
          MatT(y + (h * kDP_a5[0]) * k1 + (h * kDP_a5[1]) * k2 +
               (h * kDP_a5[2]) * k3 + (h * kDP_a5[3]) * k4));
    const MatT k6 =
        f(s + h, MatT(y + (h * kDP_a6[0]) * k1 + (h * kDP_a6[1]) * k2 +
                      (h * kDP_a6[2]) * k3 + (h * kDP_a6[3]) * k4 +
                      (h * kDP_a6[4]) * k5));
    const MatT y5 = y + (h * kDP_b[0]) * k1 + (h * kDP_b[2]) * k3 +
                    (h * kDP_b[3]) * k4 + (h * kDP_b[4]) * k5 +
                    (h * kDP_b[5]) * k6;
    const MatT k7 = f(s + h, y5);
    const MatT err = (h * kDP_e[0]) * k1 + (h * kDP_e[2]) * k3 +
                     (h * kDP_e[3]) * k4 + (h * kDP_e[4]) * k5 +
                     (h * kDP_e[5]) * k6 + (h * kDP_e[6]) * k7;
    const double scale =
        tol * std::max(1.0, std::max(state_norm(y), state_norm(y5)));
    const double e = state_norm(err) / scale;
    if (e <= 1.0) {
      y = y5;
      s += h;
      k1 = k7;  // first-same-as-last
    }
    const double fac = (e > 0.0) ? 0.9 * std::pow(e, -0.2) : 5.0;
    h *= std::clamp(fac, 0.2, 5.0);
  }
  return y;
}

}  // namespace detail
}  // namespace isolab
