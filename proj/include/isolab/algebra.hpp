// Dense 2x2 complex matrix substrate: type aliases templated on the real
// scalar, closed-form 2x2 operations, and the eigen-decomposition used
// throughout (det-normalized eigenvector pairs with a deterministic phase
// convention).  Eigen provides storage and arithmetic; everything specific to
// the 2x2 SL(2,C) setting lives here as free functions.
#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <limits>

#include "isolab/errors.hpp"

namespace isolab {

template <class Real>
using Cx = std::complex<Real>;

template <class Real>
using Mat2 = Eigen::Matrix<Cx<Real>, 2, 2>;

template <class Real>
using Vec2 = Eigen::Matrix<Cx<Real>, 2, 1>;

using C = Cx<double>;
using Mat2c = Mat2<double>;
using Vec2c = Vec2<double>;

inline constexpr double kSingularDetTol = 1e-14;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

template <class Real>
Mat2<Real> identity2() {
  return Mat2<Real>::Identity();
}

// Pauli matrices sigma_1 and sigma_3 (the only two the formulas use).
template <class Real = double>
Mat2<Real> sigma1() {
  Mat2<Real> s;
  s << Cx<Real>(0), Cx<Real>(1), Cx<Real>(1), Cx<Real>(0);
  return s;
}

template <class Real = double>
Mat2<Real> sigma3() {
  Mat2<Real> s;
  s << Cx<Real>(1), Cx<Real>(0), Cx<Real>(0), Cx<Real>(-1);
  return s;
}

// diag(e^{w}, e^{-w}) = exp(w*sigma3).
template <class Real>
Mat2<Real> exp_sigma3(const Cx<Real>& w) {
  Mat2<Real> m = Mat2<Real>::Zero();
  m(0, 0) = std::exp(w);
  m(1, 1) = std::exp(-w);
  return m;
}

template <class Real>
Cx<Real> det2(const Mat2<Real>& m) {
  return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
}

template <class Real>
Cx<Real> tr2(const Mat2<Real>& m) {
  return m(0, 0) + m(1, 1);
}

template <class Real>
Mat2<Real> comm(const Mat2<Real>& a, const Mat2<Real>& b) {
  return a * b - b * a;
}

// Entrywise max-abs norm; all residual tolerances are stated in this norm.
template <class Real>
Real mnorm(const Mat2<Real>& m) {
  Real r = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r = std::max(r, std::abs(m(i, j)));
  return r;
}

template <class Real>
Real vnorm(const Vec2<Real>& v) {
  return std::max(std::abs(v(0)), std::abs(v(1)));
}

// Closed-form inverse with an explicit singularity guard.
template <class Real>
Mat2<Real> inv2(const Mat2<Real>& m) {
  const Cx<Real> d = det2(m);
  if (std::abs(d) <= Real(kSingularDetTol))
    throw SingularMatrix("inverse requested, |det| = " +
                         std::to_string(static_cast<double>(std::abs(d))));
  Mat2<Real> r;
  r << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return Mat2<Real>(r / d);
}

template <class Real>
bool is_unimodular(const Mat2<Real>& m, Real tol = Real(1e-10)) {
  return std::abs(det2(m) - Cx<Real>(1)) <= tol;
}

// Eigen-decomposition result for a 2x2 matrix: values (r1, r2) and the
// corresponding column eigenvectors stored as the columns of `vectors`.
template <class Real>
struct EigenPair2T {
  Cx<Real> r1, r2;
  Mat2<Real> vectors;  // column 0 <-> r1, column 1 <-> r2
};

using EigenPair2 = EigenPair2T<double>;

namespace detail {

// Deterministic phase fix: rotate a vector so its first component of
// magnitude > tol*norm becomes real-positive, after scaling to unit max norm.
template <class Real>
Vec2<Real> phase_fix(Vec2<Real> v) {
  const Real n = vnorm(v);
  v /= n;
  const Cx<Real> lead =
      (std::abs(v(0)) > Real(1e-8)) ? v(0) : v(1);
  v *= std::abs(lead) / lead;
  return v;
}

}  // namespace detail

// Closed-form eigen-decomposition of a 2x2 complex matrix.  Eigenvalues from
// the characteristic polynomial (principal square root of the discriminant,
// r1 taking the + branch); each eigenvector is the more robust of the two
// rows of (M - r) read off in closed form.  Vectors are phase-fixed (first
// significant component real-positive), then the PAIR is rescaled by a common
// factor 1/sqrt(det) so that det(e1, e2) = 1 exactly; the common factor is
// the price of keeping the normalization symmetric between the columns.
template <class Real>
EigenPair2T<Real> eig2(const Mat2<Real>& m, Real separation_tol = Real(1e-10)) {
  const Cx<Real> t = tr2(m), d = det2(m);
  const Cx<Real> disc = std::sqrt(t * t - Cx<Real>(4) * d);
  EigenPair2T<Real> out;
  out.r1 = (t + disc) / Cx<Real>(2);
  out.r2 = (t - disc) / Cx<Real>(2);
  if (std::abs(out.r1 - out.r2) <= separation_tol)
    throw DegenerateSpectrum("eigenvalue separation " +
                             std::to_string(static_cast<double>(
                                 std::abs(out.r1 - out.r2))));
  auto vec_for = [&](const Cx<Real>& r) -> Vec2<Real> {
    // (M - r) v = 0: candidate kernels from the two rows.
    Vec2<Real> a, b;
    a << m(0, 1), r - m(0, 0);
    b << r - m(1, 1), m(1, 0);
    Vec2<Real> v = (vnorm(a) >= vnorm(b)) ? a : b;
    if (vnorm(v) == Real(0))
      throw DegenerateSpectrum("zero eigenvector candidate (scalar matrix)");
    return detail::phase_fix(v);
  };
  Vec2<Real> e1 = vec_for(out.r1), e2 = vec_for(out.r2);
  Cx<Real> dd = e1(0) * e2(1) - e1(1) * e2(0);
  if (std::abs(dd) <= Real(kSingularDetTol))
    throw DegenerateSpectrum("eigenvectors collinear");
  const Cx<Real> s = Cx<Real>(1) / std::sqrt(dd);
  out.vectors.col(0) = e1 * s;
  out.vectors.col(1) = e2 * s;
  return out;
}

// Unit-determinant diagonalizer for a traceless matrix with known eigenvalue
// pair (+theta/2, -theta/2): columns are the +theta/2 and -theta/2
// eigenvectors in that order, so R^{-1} A R = (theta/2) sigma3.
template <class Real>
Mat2<Real> diagonalizer_for_theta(const Mat2<Real>& a, const Cx<Real>& theta,
                                  Real separation_tol = Real(1e-10)) {
  EigenPair2T<Real> ep = eig2(a, separation_tol);
  const Cx<Real> target = theta / Cx<Real>(2);
  if (std::abs(ep.r1 - target) <= std::abs(ep.r2 - target)) return ep.vectors;
  Mat2<Real> swapped;
  // Swap columns while keeping det = +1: (e2, e1) has det = -1, so negate one.
  swapped.col(0) = ep.vectors.col(1);
  swapped.col(1) = -ep.vectors.col(0);
  return swapped;
}

// Distance from a complex number to the nearest integer (used by the
// "exponent off the integers" preconditions).
template <class Real>
Real dist_to_int(const Cx<Real>& z) {
  const Real re = z.real();
  const Real nearest = std::round(re);
  const Real dre = re - nearest;
  return std::hypot(dre, z.imag());
}

}  // namespace isolab
