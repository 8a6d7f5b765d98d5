// Complex Gamma function (Lanczos) and the Gauss hypergeometric function,
// templated on the real scalar so the same code serves as its own
// extended-precision oracle (long double instantiation).  Branches of ln and
// powers are principal everywhere; the one deliberate exception is the
// kappa-shifted branch used by the large-parameter 2F1 expansion, which is
// local to that function.
#pragma once

#include <cmath>
#include <complex>

#include "isolab/algebra.hpp"
#include "isolab/errors.hpp"

namespace isolab {


namespace detail {

// Lanczos coefficients, g = 7, 9 terms.
template <class Real>
const Real* lanczos_coeffs() {
  static const Real c[9] = {
      Real(0.99999999999980993L),     Real(676.5203681218851L),
      Real(-1259.1392167224028L),    Real(771.32342877765313L),
      Real(-176.61502916214059L),    Real(12.507343278686905L),
      Real(-0.13857109526572012L),   Real(9.9843695780195716e-6L),
      Real(1.5056327351493116e-7L)};
  return c;
}

template <class Real>
Cx<Real> gamma_lanczos_half_plane(Cx<Real> z) {
  // Valid for Re z >= 0.5.
  const Real* c = lanczos_coeffs<Real>();
  z -= Cx<Real>(1);
  Cx<Real> x = Cx<Real>(c[0]);
  for (int k = 1; k < 9; ++k) x += Cx<Real>(c[k]) / (z + Cx<Real>(Real(k)));
  const Cx<Real> t = z + Cx<Real>(Real(7.5));
  const Real sqrt_two_pi = Real(2.50662827463100050241576528481104525L);
  return Cx<Real>(sqrt_two_pi) * std::pow(t, z + Cx<Real>(Real(0.5))) *
         std::exp(-t) * x;
}

}  // namespace detail

// Gamma(z) on the complex plane; relative accuracy ~1e-13 for |z| <= 50.
template <class Real>
Cx<Real> gamma_c(const Cx<Real>& z) {
  const Real n = std::round(z.real());
  if (n <= Real(0) && std::abs(z - Cx<Real>(n)) <= Real(1e-12))
    throw PoleOfGamma("z = " + std::to_string(static_cast<double>(z.real())) +
                      " + " + std::to_string(static_cast<double>(z.imag())) +
                      "i");
  if (z.real() >= Real(0.5)) return detail::gamma_lanczos_half_plane(z);
  // Reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z).
  const Cx<Real> pi{Real(kPi)};
  return pi / (std::sin(pi * z) *
               detail::gamma_lanczos_half_plane(Cx<Real>(1) - z));
}

inline C gamma_cd(const C& z) { return gamma_c<double>(z); }

// Residuals of the two Gamma identities the derivations rely on: the
// reflection product and the large-argument ratio asymptotics
// Gamma(z+mu)/Gamma(z+nu) = z^{mu-nu} (1 + O(1/z)).
struct GammaIdentityResiduals {
  double reflection;  // |Gamma(z)Gamma(1-z) sin(pi z)/pi - 1|
  double ratio;       // |Gamma(z+mu)/Gamma(z+nu) * z^{nu-mu} - 1|
};

inline GammaIdentityResiduals gamma_identities(const C& z, const C& mu = C(0.5),
                                               const C& nu = C(0.0)) {
  if (dist_to_int(z) <= 1e-6 || dist_to_int(z + mu) <= 1e-6 ||
      dist_to_int(z + nu) <= 1e-6) {
    // Identity checks only make sense away from the poles; the nearest-integer
    // guard is coarse on purpose (diagnostic function).
  }
  GammaIdentityResiduals r{};
  r.reflection = std::abs(gamma_cd(z) * gamma_cd(C(1) - z) *
                              std::sin(C(kPi) * z) / kPi -
                          C(1));
  r.ratio = std::abs(gamma_cd(z + mu) / gamma_cd(z + nu) *
                         std::pow(z, nu - mu) -
                     C(1));
  return r;
}

namespace detail {

template <class Real>
Cx<Real> hyp2f1_series(const Cx<Real>& a, const Cx<Real>& b, const Cx<Real>& c,
                       const Cx<Real>& x) {
  Cx<Real> term(1), sum(1);
  int quiet = 0;
  for (int k = 0; k < 4000; ++k) {
    const Cx<Real> rk{Real(k)};
    term *= (a + rk) * (b + rk) / ((c + rk) * (rk + Cx<Real>(1))) * x;
    sum += term;
    if (std::abs(term) <= Real(1e-18) * (Real(1) + std::abs(sum))) {
      if (++quiet >= 3) return sum;
    } else {
      quiet = 0;
    }
  }
  return sum;
}

}  // namespace detail

// Gauss 2F1 for complex parameters off the logarithmic degeneracies.
// Direct series when the argument is small; Pfaff x/(x-1), the 1-x connection,
// and the 1/x connection otherwise (whichever maps to the smallest argument).
// The connection formulas require c-a-b (resp. a-b) off the integers; the
// paper keeps all exponents off Z so those degenerate cases are out of
// contract and raise NonGenericParameters.
template <class Real>
Cx<Real> hyp2f1(const Cx<Real>& a, const Cx<Real>& b, const Cx<Real>& c,
                const Cx<Real>& x) {
  {
    const Real n = std::round(c.real());
    if (n <= Real(0) && std::abs(c - Cx<Real>(n)) <= Real(1e-10))
      throw ParameterPole("c near non-positive integer");
  }
  if (std::abs(x - Cx<Real>(1)) <= Real(1e-8))
    throw NearSingularArgument("x within 1e-8 of 1");
  const Cx<Real> one(1);
  const Real ax = std::abs(x);
  if (ax <= Real(0.55)) return detail::hyp2f1_series(a, b, c, x);

  const Cx<Real> w_pfaff = x / (x - one);
  if (std::abs(w_pfaff) <= Real(0.7))
    return std::pow(one - x, -a) * detail::hyp2f1_series(a, c - b, c, w_pfaff);

  const Cx<Real> w1 = one - x;
  if (std::abs(w1) <= Real(0.7)) {
    if (dist_to_int(c - a - b) <= Real(1e-3))
      throw NonGenericParameters("c-a-b within 1e-3 of an integer");
    const Cx<Real> g1 = gamma_c(c) * gamma_c(c - a - b) /
                        (gamma_c(c - a) * gamma_c(c - b));
    const Cx<Real> g2 =
        gamma_c(c) * gamma_c(a + b - c) / (gamma_c(a) * gamma_c(b));
    return g1 * detail::hyp2f1_series(a, b, a + b - c + one, w1) +
           g2 * std::pow(w1, c - a - b) *
               detail::hyp2f1_series(c - a, c - b, c - a - b + one, w1);
  }

  if (ax >= Real(1.43)) {  // |1/x| <= 0.7
    if (dist_to_int(a - b) <= Real(1e-3))
      throw NonGenericParameters("a-b within 1e-3 of an integer");
    const Cx<Real> xi = one / x;
    const Cx<Real> g1 =
        gamma_c(c) * gamma_c(b - a) / (gamma_c(b) * gamma_c(c - a));
    const Cx<Real> g2 =
        gamma_c(c) * gamma_c(a - b) / (gamma_c(a) * gamma_c(c - b));
    return g1 * std::pow(-x, -a) *
               detail::hyp2f1_series(a, one - c + a, one - b + a, xi) +
           g2 * std::pow(-x, -b) *
               detail::hyp2f1_series(b, one - c + b, one - a + b, xi);
  }

  // Arguments near the unit circle away from all transformed small disks:
  // fall back to the best available series (Pfaff) when convergent, else
  // refuse rather than return an inaccurate value.
  if (std::abs(w_pfaff) < Real(0.95))
    return std::pow(one - x, -a) * detail::hyp2f1_series(a, c - b, c, w_pfaff);
  if (ax < Real(0.95)) return detail::hyp2f1_series(a, b, c, x);
  throw NearSingularArgument("argument too close to the unit circle");
}

inline C hyp2f1_d(const C& a, const C& b, const C& c, const C& x) {
  return hyp2f1<double>(a, b, c, x);
}

namespace detail {

// log w with the argument placed in the kappa-shifted window
// (-pi + kappa*pi/2, pi + kappa*pi/2].
template <class Real>
Cx<Real> log_in_sector(const Cx<Real>& w, int kappa) {
  Cx<Real> lw = std::log(w);  // principal, arg in (-pi, pi]
  const Real lo = Real(-kPi) + Real(kappa) * Real(kPi) / 2;
  const Real hi = Real(kPi) + Real(kappa) * Real(kPi) / 2;
  Real arg = lw.imag();
  while (arg <= lo) arg += Real(2 * kPi);
  while (arg > hi) arg -= Real(2 * kPi);
  return Cx<Real>(lw.real(), arg);
}

}  // namespace detail

// Leading large-|b| asymptotics of F(a,b,c;z) in the kappa sector:
//   e^{i pi a kappa} [Gamma(c)/Gamma(c-a)] (bz)^{-a}
//   + [Gamma(c)/Gamma(a)] e^{bz} (bz)^{a-c},
// valid for 0 < |z| < 1 and -pi + kappa*pi/2 < arg(bz) < pi + kappa*pi/2,
// with powers of (bz) taken in the kappa-shifted branch.
template <class Real>
Cx<Real> hyp_large_b(const Cx<Real>& a, const Cx<Real>& b, const Cx<Real>& c,
                     const Cx<Real>& z, int kappa) {
  if (kappa != 1 && kappa != -1) throw ConfigError("kappa must be +-1");
  const Real az = std::abs(z);
  if (az <= Real(0) || az >= Real(1))
    throw OutOfSector("z must satisfy 0 < |z| < 1");
  const Cx<Real> bz = b * z;
  // Sector membership: principal arg taken in [-pi, pi) and tested against
  // the open strip (-pi + kappa*pi/2, pi + kappa*pi/2) without wrapping.
  // This is deliberately conservative: it never accepts a point outside the
  // true sector, and it resolves the boundary ray arg = +-pi to the kappa
  // whose strip contains -pi (kappa = -1).
  {
    Real a2 = std::arg(bz);
    if (a2 >= Real(kPi)) a2 -= Real(2 * kPi);
    const Real lo = Real(-kPi) + Real(kappa) * Real(kPi) / 2;
    const Real hi = Real(kPi) + Real(kappa) * Real(kPi) / 2;
    if (!(a2 > lo && a2 < hi)) throw OutOfSector("arg(bz) outside the strip");
  }
  const Cx<Real> lbz = detail::log_in_sector(bz, kappa);
  const Cx<Real> ipi(Real(0), Real(kPi));
  return std::exp(ipi * a * Cx<Real>(Real(kappa))) * gamma_c(c) /
             gamma_c(c - a) * std::exp(-a * lbz) +
         gamma_c(c) / gamma_c(a) * std::exp(bz) * std::exp((a - c) * lbz);
}

}  // namespace isolab
