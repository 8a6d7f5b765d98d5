#include "isolab/p6.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "isolab/odeint.hpp"

namespace isolab {

namespace {

constexpr double kChartTol = 1e-12;

C theta_at(const P6State& s, int which) {
  switch (which) {
    case 0:
      return s.thetas.theta0;
    case 1:
      return s.thetas.theta1;
    default:
      return s.thetas.theta_t;
  }
}

const P6Coord& coord_at(const P6State& s, int which) {
  switch (which) {
    case 0:
      return s.c0;
    case 1:
      return s.c1;
    default:
      return s.ct;
  }
}

}  // namespace

Mat2c residue_matrix(const C& z, const C& u, const C& theta) {
  Mat2c a;
  a << z + theta / 2.0, -u * z, (z + theta) / u, -z - theta / 2.0;
  return a;
}

P6Coord coords_from_residue(const Mat2c& a, const C& theta, const C& s) {
  P6Coord c;
  c.z = a(0, 0) - theta / 2.0;
  if (std::abs(c.z) <= kChartTol)
    throw ConstraintViolation("chart singular: z vanishes at a pole");
  if (std::abs(a(0, 1)) <= kChartTol)
    throw ConstraintViolation("chart singular: upper-right residue entry 0");
  c.u = -a(0, 1) / c.z;
  c.s = s;
  return c;
}

LinearSystem assemble(const P6State& state) {
  const std::array<C, 3> positions = {C(0.0), C(1.0), state.t6};
  std::array<Mat2c, 3> res;
  for (int k = 0; k < 3; ++k) {
    const P6Coord& c = coord_at(state, k);
    if (std::abs(c.u) <= kChartTol)
      throw ConstraintViolation("u coordinate must be nonzero");
    if (std::abs(c.s) <= kChartTol)
      throw ConstraintViolation("s scale must be nonzero");
    res[k] = residue_matrix(c.z, c.u, theta_at(state, k));
  }
  // Scalar normalization sums: the residues must add up to
  // -(theta_inf/2) sigma3 entry by entry.
  const C zsum = state.c0.z + state.c1.z + state.ct.z;
  const C want_zsum = -(state.thetas.theta0 + state.thetas.theta1 +
                        state.thetas.theta_t + state.thetas.theta_inf) /
                      2.0;
  const C uz = res[0](0, 1) + res[1](0, 1) + res[2](0, 1);
  const C zu = res[0](1, 0) + res[1](1, 0) + res[2](1, 0);
  const double scale =
      std::max({1.0, std::abs(state.c0.z), std::abs(state.c1.z),
                std::abs(state.ct.z)});
  if (std::abs(zsum - want_zsum) > 1e-9 * scale)
    throw ConstraintViolation("z-sum normalization violated");
  if (std::abs(uz) > 1e-9 * scale)
    throw ConstraintViolation("sum of u*z (upper-right) not zero");
  if (std::abs(zu) > 1e-9 * scale)
    throw ConstraintViolation("sum of (z+theta)/u (lower-left) not zero");

  LinearSystem sys;
  for (int k = 0; k < 3; ++k) sys.poles.push_back({positions[k], res[k]});
  std::sort(sys.poles.begin(), sys.poles.end(),
            [](const Pole& a, const Pole& b) {
              return a.position.real() < b.position.real();
            });
  sys.theta_inf = state.thetas.theta_inf;
  return sys;
}

P6State p6_random(Rng& rng, const C& t6) {
  for (int attempt = 0; attempt < 256; ++attempt) {
    const C th0 = rng.theta_off_int(-0.9, 0.9, 0.15);
    const C th1 = rng.theta_off_int(-0.9, 0.9, 0.15);
    const C thi = rng.theta_off_int(-0.9, 0.9, 0.15);
    const Mat2c r0 = rng.sl2(), r1 = rng.sl2();
    const Mat2c a0 = Mat2c(r0 * (th0 / 2.0 * sigma3<double>()) * inv2(r0));
    const Mat2c a1 = Mat2c(r1 * (th1 / 2.0 * sigma3<double>()) * inv2(r1));
    const Mat2c at = Mat2c(-thi / 2.0 * sigma3<double>() - a0 - a1);
    const C tht = 2.0 * std::sqrt(-det2(at));
    if (dist_to_int(tht) < 0.15 || std::abs(tht) < 0.15) continue;
    P6State st;
    st.t6 = t6;
    st.thetas = {th0, th1, tht, thi};
    try {
      st.c0 = coords_from_residue(a0, th0, C(1.0));
      st.c1 = coords_from_residue(a1, th1, C(1.0));
      st.ct = coords_from_residue(at, tht, C(1.0));
    } catch (const ConstraintViolation&) {
      continue;  // chart singularity; draw again
    }
    if (std::abs(st.c0.z) < 0.05 || std::abs(st.c1.z) < 0.05 ||
        std::abs(st.ct.z) < 0.05)
      continue;  // keep the chart well-conditioned for downstream use
    return st;
  }
  throw ConstraintViolation("failed to sample a generic state");
}

double first_integral_drift(const P6State& state) {
  const Mat2c a0 =
      residue_matrix(state.c0.z, state.c0.u, state.thetas.theta0);
  const Mat2c a1 =
      residue_matrix(state.c1.z, state.c1.u, state.thetas.theta1);
  const C th0 = state.thetas.theta0, th1 = state.thetas.theta1;
  const Mat2c b = Mat2c(state.thetas.theta_inf / 2.0 * sigma3<double>() + a0 +
                        a1);
  double d = 0.0;
  d = std::max(d, std::abs(tr2(a0)));
  d = std::max(d, std::abs(tr2(a1)));
  d = std::max(d, std::abs(det2(a0) + th0 * th0 / 4.0));
  d = std::max(d, std::abs(det2(a1) + th1 * th1 / 4.0));
  d = std::max(d, std::abs(det2(b) +
                           state.thetas.theta_t * state.thetas.theta_t / 4.0));
  return d;
}

namespace {

using FlowState = Eigen::Matrix<C, 2, 6>;

FlowState pack(const Mat2c& a0, const Mat2c& a1, const Mat2c& at) {
  FlowState y;
  y.block<2, 2>(0, 0) = a0;
  y.block<2, 2>(0, 2) = a1;
  y.block<2, 2>(0, 4) = at;
  return y;
}

// Project a residue back onto the isospectral leaf with eigenvalues
// +-theta/2, keeping its eigenvectors.
Mat2c isospectral_project(const Mat2c& a, const C& theta) {
  const Mat2c v = diagonalizer_for_theta(a, theta);
  return Mat2c(v * (theta / 2.0 * sigma3<double>()) * inv2(v));
}

double flow_drift(const FlowState& y, const ThetaTuple& th) {
  const Mat2c a0 = y.block<2, 2>(0, 0), a1 = y.block<2, 2>(0, 2);
  const Mat2c b = Mat2c(th.theta_inf / 2.0 * sigma3<double>() + a0 + a1);
  double d = 0.0;
  d = std::max(d, std::abs(tr2(a0)));
  d = std::max(d, std::abs(tr2(a1)));
  d = std::max(d, std::abs(det2(a0) + th.theta0 * th.theta0 / 4.0));
  d = std::max(d, std::abs(det2(a1) + th.theta1 * th.theta1 / 4.0));
  d = std::max(d, std::abs(det2(b) + th.theta_t * th.theta_t / 4.0));
  return d;
}

}  // namespace

P6State schlesinger_flow(const P6State& state, const C& t6_target,
                         double tol) {
  if (tol < 1e-13 || tol > 1e-6)
    throw ConfigError("flow tolerance outside [1e-13, 1e-6]");
  // The straight segment from t6 to the target must stay clear of the fixed
  // singularities of the deformation equations.
  for (const C fixed : {C(0.0), C(1.0)}) {
    const C d = t6_target - state.t6;
    double dist;
    if (std::abs(d) < 1e-15) {
      dist = std::abs(state.t6 - fixed);
    } else {
      const double s = std::clamp(
          (std::conj(d) * (fixed - state.t6)).real() / std::norm(d), 0.0,
          1.0);
      dist = std::abs(state.t6 + s * d - fixed);
    }
    if (dist < 1e-3) throw SingularTime("deformation path nears 0 or 1");
  }

  const Mat2c a0_in =
      residue_matrix(state.c0.z, state.c0.u, state.thetas.theta0);
  const Mat2c a1_in =
      residue_matrix(state.c1.z, state.c1.u, state.thetas.theta1);
  const Mat2c at_in =
      residue_matrix(state.ct.z, state.ct.u, state.thetas.theta_t);

  FlowState y = pack(a0_in, a1_in, at_in);
  const C t_begin = state.t6, t_end = t6_target;
  if (std::abs(t_end - t_begin) > 0) {
    // Integrate in chunks, restoring the first integrals between chunks so
    // long flows cannot wander off the constraint manifold.
    const int chunks = 8;
    for (int seg = 0; seg < chunks; ++seg) {
      const C ta = t_begin + (t_end - t_begin) * (double(seg) / chunks);
      const C tb = t_begin + (t_end - t_begin) * (double(seg + 1) / chunks);
      auto rhs = [&](double s, const FlowState& v) {
        const C t = ta + s * (tb - ta);
        const Mat2c a0 = v.block<2, 2>(0, 0);
        const Mat2c a1 = v.block<2, 2>(0, 2);
        const Mat2c at = v.block<2, 2>(0, 4);
        const Mat2c d0 = Mat2c(comm(at, a0) / t);
        const Mat2c d1 = Mat2c(comm(at, a1) / (t - C(1.0)));
        FlowState out = pack(d0, d1, Mat2c(-d0 - d1));
        out *= (tb - ta);
        return out;
      };
      y = detail::dopri5<FlowState>(y, rhs, 0.0, 1.0, tol);
      if (flow_drift(y, state.thetas) > 1e-11) {
        const Mat2c p0 =
            isospectral_project(y.block<2, 2>(0, 0), state.thetas.theta0);
        const Mat2c p1 =
            isospectral_project(y.block<2, 2>(0, 2), state.thetas.theta1);
        const Mat2c pt = Mat2c(
            -state.thetas.theta_inf / 2.0 * sigma3<double>() - p0 - p1);
        y = pack(p0, p1, pt);
      }
    }
  }

  P6State out;
  out.t6 = t6_target;
  out.thetas = state.thetas;
  out.c0 = coords_from_residue(y.block<2, 2>(0, 0), state.thetas.theta0,
                               state.c0.s);
  out.c1 = coords_from_residue(y.block<2, 2>(0, 2), state.thetas.theta1,
                               state.c1.s);
  out.ct = coords_from_residue(y.block<2, 2>(0, 4), state.thetas.theta_t,
                               state.ct.s);
  return out;
}

C y6_of(const P6State& state) {
  const C t = state.t6;
  const C w0 = state.c0.u * state.c0.z;   // upper-right residue entries, sign
  const C w1 = state.c1.u * state.c1.z;   // flipped: A(0,1) = -u z
  const C wt = state.ct.u * state.ct.z;
  const C den1 = (t + 1.0) * w0 + t * w1 + wt;
  if (std::abs(den1) <= 1e-12) throw IndeterminateY("first form denominator");
  const C y_a = t * w0 / den1;
  if (std::abs(w0) <= 1e-12)
    throw IndeterminateY("u0*z0 vanishes; ratio forms undefined");
  const C den2 = C(1.0) + (C(1.0) - C(1.0) / t) * (w1 / w0);
  if (std::abs(den2) <= 1e-12) throw IndeterminateY("second form denominator");
  const C y_b = C(1.0) / den2;
  const C den3 = C(1.0) + (C(1.0) - t) * (wt / w0);
  if (std::abs(den3) <= 1e-12) throw IndeterminateY("third form denominator");
  const C y_c = t / den3;
  const double spread = std::max(std::abs(y_a - y_b), std::abs(y_a - y_c));
  if (spread > 1e-9 * std::max(1.0, std::abs(y_a)))
    throw ConstraintViolation("equivalent transcendent forms disagree");
  return y_a;
}

Tau6Report tau6_sigma6(const std::vector<P6State>& trajectory) {
  const size_t n = trajectory.size();
  if (n < 5 || (n - 1) % 2 != 0)
    throw GridTooCoarse(
        "need at least five uniformly spaced samples (even interval count)");
  const C h = trajectory[1].t6 - trajectory[0].t6;
  for (size_t k = 1; k + 1 < n; ++k) {
    const C step = trajectory[k + 1].t6 - trajectory[k].t6;
    if (std::abs(step - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw GridTooCoarse("trajectory grid is not uniform");
  }

  Tau6Report rep;
  rep.samples.reserve(n);
  std::vector<C> prime(n);
  for (size_t k = 0; k < n; ++k) {
    const P6State& s = trajectory[k];
    const Mat2c a0 = residue_matrix(s.c0.z, s.c0.u, s.thetas.theta0);
    const Mat2c a1 = residue_matrix(s.c1.z, s.c1.u, s.thetas.theta1);
    const Mat2c at = residue_matrix(s.ct.z, s.ct.u, s.thetas.theta_t);
    const C t = s.t6;
    Tau6Sample smp;
    smp.t6 = t;
    smp.dlog_tau = tr2(Mat2c((a0 / t + a1 / (t - C(1.0))) * at));
    smp.sigma_hat = t * (t - C(1.0)) * smp.dlog_tau;
    const C prime_direct = tr2(Mat2c(a0 * at)) + tr2(Mat2c(a1 * at));
    const C prime_alt =
        -tr2(Mat2c(s.thetas.theta_inf / 2.0 * sigma3<double>() * at)) -
        tr2(Mat2c(at * at));
    rep.max_dual_mismatch = std::max(rep.max_dual_mismatch,
                                     std::abs(prime_direct - prime_alt));
    if (rep.max_dual_mismatch > 1e-7)
      throw GridTooCoarse("pointwise sigma-derivative forms disagree");
    smp.sigma_hat_prime = prime_direct;
    prime[k] = prime_direct;
    // Pointwise closure: sigma_hat = t * prime - tr(A0 At).
    const C closure = t * prime_direct - tr2(Mat2c(a0 * at));
    rep.max_point_mismatch =
        std::max(rep.max_point_mismatch, std::abs(smp.sigma_hat - closure));
    rep.samples.push_back(smp);
  }
  // Cumulative Simpson quadrature of the derivative along the grid.
  rep.samples[0].sigma_hat_quad = rep.samples[0].sigma_hat;
  for (size_t k = 2; k < n; k += 2) {
    const C panel = h / 3.0 * (prime[k - 2] + 4.0 * prime[k - 1] + prime[k]);
    rep.samples[k].sigma_hat_quad =
        rep.samples[k - 2].sigma_hat_quad + panel;
    // Midpoint of the panel, fourth-order interior formula.
    rep.samples[k - 1].sigma_hat_quad =
        rep.samples[k - 2].sigma_hat_quad +
        h / 12.0 * (5.0 * prime[k - 2] + 8.0 * prime[k - 1] - prime[k]);
  }
  for (size_t k = 0; k < n; ++k) {
    rep.max_quad_mismatch =
        std::max(rep.max_quad_mismatch,
                 std::abs(rep.samples[k].sigma_hat_quad -
                          rep.samples[k].sigma_hat));
  }
  return rep;
}

P6State reflect_infinity(const P6State& state, const int (&signs)[3]) {
  P6State out;
  out.t6 = state.t6;
  out.thetas.theta_inf = -state.thetas.theta_inf;
  const C ths[3] = {state.thetas.theta0, state.thetas.theta1,
                    state.thetas.theta_t};
  C new_th[3];
  P6Coord new_c[3];
  for (int k = 0; k < 3; ++k) {
    if (signs[k] != 1 && signs[k] != -1)
      throw ConfigError("reflection signs must be +-1");
    const P6Coord& c = coord_at(state, k);
    new_th[k] = double(signs[k]) * ths[k];
    const C den = c.z + (new_th[k] + ths[k]) / 2.0;
    if (std::abs(den) <= 1e-12)
      throw ReflectionSingular("z + (new+old)/2 exponent sum vanishes");
    if (std::abs(c.u) <= 1e-14)
      throw ReflectionSingular("u coordinate vanishes");
    new_c[k].z = -den;
    new_c[k].u = (c.z + ths[k]) / (c.u * den);
    new_c[k].s = c.s;
  }
  out.thetas.theta0 = new_th[0];
  out.thetas.theta1 = new_th[1];
  out.thetas.theta_t = new_th[2];
  out.c0 = new_c[0];
  out.c1 = new_c[1];
  out.ct = new_c[2];
  // The construction must realize entrywise conjugation by sigma1.
  for (int k = 0; k < 3; ++k) {
    const P6Coord& c = coord_at(state, k);
    const Mat2c before = residue_matrix(c.z, c.u, ths[k]);
    const Mat2c after = residue_matrix(new_c[k].z, new_c[k].u, new_th[k]);
    const Mat2c want = Mat2c(sigma1<double>() * before * sigma1<double>());
    if (mnorm(Mat2c(after - want)) >
        1e-10 * std::max(1.0, mnorm(want)))
      throw ConstraintViolation("reflection failed to conjugate by sigma1");
  }
  return out;
}

}  // namespace isolab
