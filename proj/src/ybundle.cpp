#include "isolab/ybundle.hpp"

#include "isolab/special.hpp"

namespace isolab {

namespace {

const C kI(0, 1);

C epi(const C& w) { return std::exp(kI * C(kPi) * w); }  // e^{i pi w}

}  // namespace

YBundle y_bundle(const HyperParams& p) {
  const C a = p.alpha, b = p.beta, g = p.gamma;
  for (const C& th : {p.theta_inf(), p.theta0(), p.theta1()})
    if (dist_to_int(th) <= 1e-6)
      throw NonGenericParameters("bundle exponent within 1e-6 of an integer");

  YBundle yb;
  yb.params = p;

  const C ba = b - a;
  // Residue at 0; the residue at 1 is defined through the sum rule
  // A0Y + A1Y = ((beta-alpha)/2) sigma3, which also fixes the local exponents
  // det A1Y = -Theta_1Y^2/4.
  const C x2 = ((a + b) * (C(1) - g) + C(2) * a * b) / C(2);
  yb.A0Y << -x2 / ba, b * (b + C(1) - g) / ba,
      -a * (a + C(1) - g) / ba, x2 / ba;
  yb.A1Y = Mat2c(C(0.5) * ba * sigma3<double>() - yb.A0Y);

  yb.G0 << (b + C(1) - g) / ba, b / ba, (a + C(1) - g) / ba, a / ba;
  yb.G1 << C(1) / ba, b * (b + C(1) - g) / ba, C(1) / ba,
      a * (a + C(1) - g) / ba;

  auto G = [](const C& z) { return gamma_cd(z); };

  yb.C0 << epi(-(a + C(1) - g)) * G(g - C(1)) * G(a - b + C(1)) /
               (G(g - b) * G(a)),
      -epi(-(b + C(1) - g)) * G(g - C(1)) * G(b - a + C(1)) /
          (G(g - a) * G(b)),
      epi(-a) * G(C(1) - g) * G(a - b + C(1)) / (G(C(1) - b) * G(a + C(1) - g)),
      -epi(-b) * G(C(1) - g) * G(b - a + C(1)) /
          (G(C(1) - a) * G(b + C(1) - g));

  const C d = g - a - b - C(1);  // Theta_1Y
  yb.C1 << -G(a + b + C(1) - g) * G(a - b + C(1)) / (G(a + C(1) - g) * G(a)),
      G(a + b + C(1) - g) * G(b - a + C(1)) / (G(b + C(1) - g) * G(b)),
      -epi(-d) * G(d) * G(a - b + C(1)) / (G(C(1) - b) * G(g - b)),
      epi(-d) * G(d) * G(b - a + C(1)) / (G(C(1) - a) * G(g - a));

  return yb;
}

Mat2c y_monodromy_closed(const YBundle& yb, int nu) {
  const Mat2c& cm = (nu == 0) ? yb.C0 : yb.C1;
  const C th = (nu == 0) ? yb.params.theta0() : yb.params.theta1();
  return Mat2c(inv2(cm) * exp_sigma3(kI * C(kPi) * th) * cm);
}

Mat2c k_hat_matrix(const HyperParams& p, int kappa) {
  const C a = p.alpha, b = p.beta, g = p.gamma;
  auto G = [](const C& z) { return gamma_cd(z); };
  Mat2c m;
  m << G(a - b) / G(a), G(b - a) / G(b),
      -epi(a * C(kappa)) * G(C(1) + a - b) / G(C(1) - b),
      epi(b * C(kappa)) * G(C(1) + b - a) / G(C(1) - a);
  // Prefix (alpha-beta)^{sigma3/2} and suffix (1-gamma)^{((beta-alpha)/2)s3}:
  // both diagonal powers in the principal branch.  The diagonal-power reading
  // of the prefix is forced by unimodularity (the Gamma matrix above has
  // det = 1 identically).
  const Mat2c pre = exp_sigma3(C(0.5) * std::log(a - b));
  const Mat2c suf = exp_sigma3(C(0.5) * (b - a) * std::log(C(1) - g));
  return Mat2c(pre * m * suf);
}

Mat2c y_asymptotic_frame(const HyperParams& p, int kappa) {
  if (std::abs(C(1) - p.gamma) < 10.0)
    throw SmallParameterRegime("|1-gamma| < 10");
  if (kappa != 1 && kappa != -1) throw ConfigError("kappa must be +-1");
  return k_hat_matrix(p, kappa);
}

}  // namespace isolab
