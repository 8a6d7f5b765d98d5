#include "isolab/p5.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "isolab/odeint.hpp"

namespace isolab {

namespace {

constexpr double kChartTol = 1e-12;
// Correction depth of the anchor expansion at the irregular point.  The
// order-lambda^{-1} matching fixes the first coefficient; the same matching
// at higher orders supplies the rest.  Four terms keep the anchor error far
// below the 5e-4 sector-agreement budget even when Re(theta_inf) approaches
// one (the anchored recessive-column contamination scales like
// R^{Re(theta_inf) - terms - 1}).
constexpr int kTailTerms = 4;

const C kI(0.0, 1.0);

// Frequently used half-sum combinations of the exponents.
struct ThetaCombo {
  C half_inf;  // (theta0 + theta_inf)/2
  C mid;       // (theta0 - theta1 + theta_inf)/2
  C top;       // (theta0 + theta1 + theta_inf)/2
};

ThetaCombo combos(const ThetaTuple& th) {
  return {(th.theta0 + th.theta_inf) / 2.0,
          (th.theta0 - th.theta1 + th.theta_inf) / 2.0,
          (th.theta0 + th.theta1 + th.theta_inf) / 2.0};
}

// Constant term of the coefficient must be (t5/2) sigma3; returns t5.
C irregular_direction(const LinearSystem& sys) {
  const Mat2c& pp = sys.poly_part;
  const double sc = std::max(1.0, mnorm(pp));
  if (std::abs(pp(0, 1)) > 1e-12 * sc || std::abs(pp(1, 0)) > 1e-12 * sc ||
      std::abs(pp(0, 0) + pp(1, 1)) > 1e-12 * sc)
    throw SectorViolation("constant coefficient term is not of sigma3 type");
  const C t5 = 2.0 * pp(0, 0);
  if (std::abs(t5) <= 1e-12)
    throw SectorViolation("vanishing irregular direction (t5 = 0)");
  return t5;
}

Mat2c residue_sum(const LinearSystem& sys) {
  Mat2c s = Mat2c::Zero();
  for (const Pole& p : sys.poles) s += p.residue;
  return s;
}

void check_diagonal_normalization(const Mat2c& sum, const C& theta_inf,
                                  double tol) {
  const double sc = std::max(1.0, mnorm(sum));
  if (std::abs(sum(0, 0) + theta_inf / 2.0) > tol * sc ||
      std::abs(sum(1, 1) - theta_inf / 2.0) > tol * sc)
    throw ConstraintViolation(
        "residue sum diagonal must equal -(theta_inf/2) sigma3");
}

// Project a residue back onto the isospectral leaf with eigenvalues
// +-theta/2, keeping its eigenvectors.
Mat2c isospectral_project(const Mat2c& a, const C& theta) {
  const Mat2c v = diagonalizer_for_theta(a, theta);
  return Mat2c(v * (theta / 2.0 * sigma3<double>()) * inv2(v));
}

}  // namespace

Mat2c a05_matrix(const P5State& s) {
  const C th0 = s.thetas.theta0;
  Mat2c a;
  a << s.z5 + th0 / 2.0, -s.u5 * (s.z5 + th0), s.z5 / s.u5, -s.z5 - th0 / 2.0;
  return a;
}

Mat2c a15_matrix(const P5State& s) {
  const ThetaCombo cb = combos(s.thetas);
  const C w = s.u5 * s.y5;
  Mat2c a;
  a << -s.z5 - cb.half_inf, w * (s.z5 + cb.mid),
      -(s.z5 + cb.top) / w, s.z5 + cb.half_inf;
  return a;
}

LinearSystem assemble5(const P5State& state) {
  if (std::abs(state.u5) <= kChartTol)
    throw ConstraintViolation("u5 coordinate must be nonzero");
  if (std::abs(state.y5) <= kChartTol)
    throw ConstraintViolation("y5 coordinate must be nonzero");
  const Mat2c a0 = a05_matrix(state), a1 = a15_matrix(state);
  const double sc = std::max({1.0, mnorm(a0), mnorm(a1)});
  const Mat2c sum = Mat2c(a0 + a1);
  if (std::abs(sum(0, 0) + state.thetas.theta_inf / 2.0) > 1e-10 * sc ||
      std::abs(sum(1, 1) - state.thetas.theta_inf / 2.0) > 1e-10 * sc)
    throw ConstraintViolation("diagonal normalization violated");
  const C th0 = state.thetas.theta0, th1 = state.thetas.theta1;
  if (std::abs(det2(a0) + th0 * th0 / 4.0) > 1e-10 * sc * sc ||
      std::abs(det2(a1) + th1 * th1 / 4.0) > 1e-10 * sc * sc)
    throw ConstraintViolation("determinant normalization violated");

  LinearSystem sys;
  sys.poles.push_back({C(0.0), a0});
  sys.poles.push_back({C(1.0), a1});
  sys.poly_part = Mat2c(state.t5 / 2.0 * sigma3<double>());
  sys.theta_inf = state.thetas.theta_inf;
  return sys;
}

P5State p5_from_residues(const Mat2c& a0, const Mat2c& a1, const C& t5,
                         const ThetaTuple& thetas) {
  P5State st;
  st.t5 = t5;
  st.thetas = thetas;
  st.z5 = a0(0, 0) - thetas.theta0 / 2.0;
  const C du = st.z5 + thetas.theta0;
  if (std::abs(du) <= kChartTol)
    throw ConstraintViolation("chart singular: z5 + theta0 vanishes");
  st.u5 = -a0(0, 1) / du;
  if (std::abs(st.u5) <= kChartTol)
    throw ConstraintViolation("chart singular: u5 vanishes");
  const ThetaCombo cb = combos(thetas);
  const C dy = st.u5 * (st.z5 + cb.mid);
  if (std::abs(dy) <= kChartTol)
    throw ConstraintViolation("chart singular: y5 denominator vanishes");
  st.y5 = a1(0, 1) / dy;
  if (std::abs(st.y5) <= kChartTol)
    throw ConstraintViolation("chart singular: y5 vanishes");
  const double sc = std::max({1.0, mnorm(a0), mnorm(a1)});
  if (mnorm(Mat2c(a05_matrix(st) - a0)) > 1e-6 * sc ||
      mnorm(Mat2c(a15_matrix(st) - a1)) > 1e-6 * sc)
    throw ConstraintViolation("residues are off the parametrized manifold");
  return st;
}

P5State p5_random(Rng& rng, const C& t5) {
  if (std::abs(t5) <= 1e-12)
    throw SingularTime("t5 must be nonzero for a deformation state");
  for (int attempt = 0; attempt < 256; ++attempt) {
    P5State st;
    st.t5 = t5;
    st.thetas.theta0 = rng.theta_off_int(-0.9, 0.9, 0.15);
    st.thetas.theta1 = rng.theta_off_int(-0.9, 0.9, 0.15);
    st.thetas.theta_t = C(0.0);
    st.thetas.theta_inf = rng.theta_off_int(-0.9, 0.9, 0.1);
    st.z5 = 0.7 * rng.cgauss();
    st.u5 = std::exp(0.4 * rng.cgauss());
    st.y5 = std::exp(0.4 * rng.cgauss());
    const ThetaCombo cb = combos(st.thetas);
    // Keep the chart away from its coordinate singularities so flows and
    // re-extraction stay well conditioned.
    const double margin =
        std::min({std::abs(st.z5), std::abs(st.z5 + st.thetas.theta0),
                  std::abs(st.z5 + cb.mid), std::abs(st.z5 + cb.top)});
    if (margin < 0.08) continue;
    return st;
  }
  throw ConstraintViolation("failed to sample a generic state");
}

namespace {

using FlowState5 = Eigen::Matrix<C, 2, 4>;

FlowState5 pack5(const Mat2c& a0, const Mat2c& a1) {
  FlowState5 y;
  y.block<2, 2>(0, 0) = a0;
  y.block<2, 2>(0, 2) = a1;
  return y;
}

double flow_drift5(const FlowState5& y, const ThetaTuple& th) {
  const Mat2c a0 = y.block<2, 2>(0, 0), a1 = y.block<2, 2>(0, 2);
  double d = 0.0;
  d = std::max(d, std::abs(tr2(a0)));
  d = std::max(d, std::abs(tr2(a1)));
  d = std::max(d, std::abs(det2(a0) + th.theta0 * th.theta0 / 4.0));
  d = std::max(d, std::abs(det2(a1) + th.theta1 * th.theta1 / 4.0));
  d = std::max(d, std::abs(a0(0, 0) + a1(0, 0) + th.theta_inf / 2.0));
  return d;
}

}  // namespace

P5State idm5_flow(const P5State& state, const C& t5_target, double tol) {
  if (tol < 1e-13 || tol > 1e-6)
    throw ConfigError("flow tolerance outside [1e-13, 1e-6]");
  // The straight deformation segment must stay clear of the collision of
  // the irregular point with the regular ones at t5 = 0.
  {
    const C d = t5_target - state.t5;
    double dist;
    if (std::abs(d) < 1e-15) {
      dist = std::abs(state.t5);
    } else {
      const double s = std::clamp(
          (std::conj(d) * (C(0.0) - state.t5)).real() / std::norm(d), 0.0,
          1.0);
      dist = std::abs(state.t5 + s * d);
    }
    if (dist < 1e-3) throw SingularTime("deformation path nears t5 = 0");
  }

  FlowState5 y = pack5(a05_matrix(state), a15_matrix(state));
  const C t_begin = state.t5, t_end = t5_target;
  if (std::abs(t_end - t_begin) > 0) {
    const int chunks = 8;
    for (int seg = 0; seg < chunks; ++seg) {
      const C ta = t_begin + (t_end - t_begin) * (double(seg) / chunks);
      const C tb = t_begin + (t_end - t_begin) * (double(seg + 1) / chunks);
      auto rhs = [&](double s, const FlowState5& v) {
        const C t = ta + s * (tb - ta);
        const Mat2c a0 = v.block<2, 2>(0, 0);
        const Mat2c a1 = v.block<2, 2>(0, 2);
        const Mat2c b = Mat2c(
            (state.thetas.theta_inf / 2.0 * sigma3<double>() + a0 + a1) / t);
        const Mat2c d0 = comm(b, a0);
        const Mat2c d1 =
            comm(Mat2c(b + 0.5 * sigma3<double>()), a1);
        FlowState5 out = pack5(d0, d1);
        out *= (tb - ta);
        return out;
      };
      y = detail::dopri5<FlowState5>(y, rhs, 0.0, 1.0, tol);
      if (flow_drift5(y, state.thetas) > 1e-11) {
        const Mat2c p0 =
            isospectral_project(y.block<2, 2>(0, 0), state.thetas.theta0);
        const Mat2c p1 =
            isospectral_project(y.block<2, 2>(0, 2), state.thetas.theta1);
        y = pack5(p0, p1);
      }
    }
  }
  return p5_from_residues(y.block<2, 2>(0, 0), y.block<2, 2>(0, 2), t5_target,
                          state.thetas);
}

std::vector<Mat2c> irregular_tail(const LinearSystem& sys, int terms) {
  if (terms < 0 || terms > 64)
    throw ConfigError("tail depth outside [0, 64]");
  const C t5 = irregular_direction(sys);
  const C thi = sys.theta_inf;
  check_diagonal_normalization(residue_sum(sys), thi, 1e-8);

  // Moment matrices D_p = sum_nu A_nu nu^p drive the expansion of the
  // regular part sum_nu A_nu/(lambda - nu) in powers of 1/lambda.
  std::vector<Mat2c> mom(static_cast<size_t>(terms) + 1, Mat2c::Zero());
  for (const Pole& p : sys.poles) {
    C power(1.0);
    for (Mat2c& d : mom) {
      d += p.residue * power;
      power *= p.position;
    }
  }

  std::vector<Mat2c> psi;
  psi.reserve(static_cast<size_t>(terms) + 1);
  psi.push_back(Mat2c::Identity());
  const Mat2c half_thi_s3 = Mat2c(thi / 2.0 * sigma3<double>());
  for (int m = 0; m + 1 <= terms; ++m) {
    // Order lambda^{-(m+1)} matching fixes the off-diagonal of Psi_{m+1}.
    Mat2c rhs = Mat2c(double(m) * psi[m] + psi[m] * half_thi_s3);
    for (int k = 0; k <= m; ++k) rhs += mom[m - k] * psi[k];
    Mat2c nxt = Mat2c::Zero();
    nxt(0, 1) = -rhs(0, 1) / t5;
    nxt(1, 0) = rhs(1, 0) / t5;
    // The diagonal follows from the next order's diagonal consistency (the
    // theta_inf terms cancel against the pinned diagonal of D_0).
    Mat2c acc = Mat2c::Zero();
    for (int k = 0; k <= m; ++k) acc += mom[m + 1 - k] * psi[k];
    nxt(0, 0) = -(mom[0](0, 1) * nxt(1, 0) + acc(0, 0)) / double(m + 1);
    nxt(1, 1) = -(mom[0](1, 0) * nxt(0, 1) + acc(1, 1)) / double(m + 1);
    psi.push_back(nxt);
  }
  return {psi.begin() + 1, psi.end()};
}

namespace {

// Truncated anchor frame at radius r and cover angle a (the log branch is
// taken on the cover, so a is not reduced mod 2 pi).
Mat2c anchor_frame(const std::vector<Mat2c>& tail, const C& t5, const C& thi,
                   double r, double a) {
  const C lambda = std::polar(r, a);
  const C inv_lambda = 1.0 / lambda;
  Mat2c phi = Mat2c::Identity();
  C p = inv_lambda;
  for (const Mat2c& tm : tail) {
    phi += tm * p;
    p *= inv_lambda;
  }
  const C log_lambda(std::log(r), a);
  const C w = t5 / 2.0 * lambda - thi / 2.0 * log_lambda;
  return Mat2c(phi * exp_sigma3(w));
}

}  // namespace

CanonicalFrame canonical_frames(const LinearSystem& sys, int k, double R,
                                double tol) {
  if (!sys.has_poly_part())
    throw SectorViolation("no constant coefficient term: no sectors");
  const C t5 = irregular_direction(sys);
  if (std::abs(k) > 4)
    throw SectorViolation("sector index outside the supported cover range");
  const double at5 = std::abs(t5);
  if (at5 * R < 30.0)
    throw AnchorTooClose("anchor radius below 30/|t5|");
  const double r_in = std::max(2.0 / at5, 1.6);
  if (R < 2.5 * r_in)
    throw AnchorTooClose("anchor radius too near the matching radius");
  check_diagonal_normalization(residue_sum(sys), sys.theta_inf, 1e-8);

  const std::vector<Mat2c> tail = irregular_tail(sys, kTailTerms);
  const double arg_t = std::arg(t5);
  // Central ray of the sector: arg(lambda t5) = -pi/2 + pi k, where both
  // exponentials are purely oscillatory and the anchor is stable.
  const double a_c = -kPi / 2.0 + kPi * k - arg_t;

  auto continue_inward = [&](double a) {
    const Mat2c f = anchor_frame(tail, t5, sys.theta_inf, R, a);
    const Path ray = segment_path(std::polar(R, a), std::polar(r_in, a));
    return Mat2c(transfer(sys, ray, tol) * f);
  };

  CanonicalFrame out;
  out.k = k;
  out.radius_outer = R;
  out.radius_inner = r_in;
  out.anchor_angle = a_c;
  out.ray_point = std::polar(r_in, a_c);
  out.at_ray = continue_inward(a_c);

  // Quarter arcs to the dominance hubs shared with the two neighbours.
  out.hub_upper_point = std::polar(r_in, a_c + kPi / 2.0);
  out.at_hub_upper = Mat2c(
      transfer(sys, arc_path(r_in, a_c, a_c + kPi / 2.0), tol) * out.at_ray);
  out.hub_lower_point = std::polar(r_in, a_c - kPi / 2.0);
  out.at_hub_lower = Mat2c(
      transfer(sys, arc_path(r_in, a_c, a_c - kPi / 2.0), tol) * out.at_ray);

  // Re-anchor on the sector's two boundary rays and carry both to the
  // central inner point.  A boundary anchor determines only the column that
  // stays recessive across the dominance zone between it and the central
  // ray (the other column is shifted by a Stokes multiple of it, an O(1)
  // effect), so compare exactly those columns against the central frame.
  const Mat2c from_plus = Mat2c(
      transfer(sys, arc_path(r_in, a_c + kPi, a_c), tol) *
      continue_inward(a_c + kPi));
  const Mat2c from_minus = Mat2c(
      transfer(sys, arc_path(r_in, a_c - kPi, a_c), tol) *
      continue_inward(a_c - kPi));
  // Zone above the central ray has arg(lambda t5) near pi*k: the first
  // exponential dominates there for even k, the second for odd k.
  const int stable_up = (k & 1) ? 0 : 1;
  const int stable_lo = 1 - stable_up;
  Mat2c coldiff = Mat2c::Zero();
  coldiff.col(stable_up) = from_plus.col(stable_up) - out.at_ray.col(stable_up);
  coldiff.col(stable_lo) =
      from_minus.col(stable_lo) - out.at_ray.col(stable_lo);
  out.boundary_anchor_mismatch =
      mnorm(coldiff) / std::max(1e-300, mnorm(out.at_ray));
  return out;
}

namespace {

StokesData stokes_from_frames(const CanonicalFrame& f0,
                              const CanonicalFrame& f1,
                              const CanonicalFrame& f2, const C& theta_inf) {
  StokesData sd;
  sd.theta_inf5 = theta_inf;
  const Mat2c raw0 = Mat2c(inv2(f0.at_hub_upper) * f1.at_hub_lower);
  const Mat2c raw1 = Mat2c(inv2(f1.at_hub_upper) * f2.at_hub_lower);
  // raw0 must be lower unipotent, raw1 upper unipotent; everything off that
  // pattern is numerical residue.
  const double n0 = std::max(1.0, mnorm(raw0));
  const double n1 = std::max(1.0, mnorm(raw1));
  const double off0 =
      std::max({std::abs(raw0(0, 1)), std::abs(raw0(0, 0) - C(1.0)),
                std::abs(raw0(1, 1) - C(1.0))});
  const double off1 =
      std::max({std::abs(raw1(1, 0)), std::abs(raw1(0, 0) - C(1.0)),
                std::abs(raw1(1, 1) - C(1.0))});
  sd.off_pattern_residual = std::max(off0 / n0, off1 / n1);
  if (sd.off_pattern_residual > 1e-3)
    throw NonUnipotentResidual(
        "off-pattern entries of the sector quotients reach " +
        std::to_string(sd.off_pattern_residual));
  sd.s0 = raw0(1, 0);
  sd.s1 = raw1(0, 1);
  sd.S0 = Mat2c::Identity();
  sd.S0(1, 0) = sd.s0;
  sd.S1 = Mat2c::Identity();
  sd.S1(0, 1) = sd.s1;
  // Frames two sectors apart live one sheet apart: their hub values must
  // differ by exactly e^{-i pi theta_inf sigma3}.
  sd.periodicity_residual =
      mnorm(Mat2c(f2.at_hub_lower -
                  f0.at_hub_lower * exp_sigma3(-kI * C(kPi) * theta_inf))) /
      std::max(1e-300, mnorm(f0.at_hub_lower));
  sd.boundary_mismatch =
      std::max({f0.boundary_anchor_mismatch, f1.boundary_anchor_mismatch,
                f2.boundary_anchor_mismatch});
  return sd;
}

double resolve_anchor_radius(const LinearSystem& sys, double R) {
  if (R > 0.0) return R;
  const C t5 = irregular_direction(sys);
  return 200.0 / std::abs(t5);
}

}  // namespace

Mat2c StokesData::s_matrix(int k) const {
  const int parity = ((k % 2) + 2) % 2;
  const int shifts = (k - parity) / 2;
  const Mat2c& base = (parity == 0) ? S0 : S1;
  const C w = kI * C(kPi) * theta_inf5 * C(double(shifts));
  return Mat2c(exp_sigma3(w) * base * exp_sigma3(-w));
}

Mat2c StokesData::m_inf() const {
  return Mat2c(S0 * S1 * exp_sigma3(kI * C(kPi) * theta_inf5));
}

StokesData stokes_of(const LinearSystem& sys, double R, double tol) {
  const double radius = resolve_anchor_radius(sys, R);
  const CanonicalFrame f0 = canonical_frames(sys, 0, radius, tol);
  const CanonicalFrame f1 = canonical_frames(sys, 1, radius, tol);
  const CanonicalFrame f2 = canonical_frames(sys, 2, radius, tol);
  return stokes_from_frames(f0, f1, f2, sys.theta_inf);
}

M5Point m5_point(const LinearSystem& sys, double R, double tol) {
  const double radius = resolve_anchor_radius(sys, R);
  const CanonicalFrame f0 = canonical_frames(sys, 0, radius, tol);
  const CanonicalFrame f1 = canonical_frames(sys, 1, radius, tol);
  const CanonicalFrame f2 = canonical_frames(sys, 2, radius, tol);
  M5Point out;
  out.stokes = stokes_from_frames(f0, f1, f2, sys.theta_inf);

  // Carry the first canonical frame to a base point below the real axis and
  // read the regular-point loops in its basis.
  const C t5 = irregular_direction(sys);
  const C base = C(0.5, -0.9) * std::exp(-kI * std::arg(t5));
  const Mat2c frame_base = Mat2c(
      transfer(sys, segment_path(f0.ray_point, base), tol) * f0.at_ray);
  const Mat2c m0 =
      loop_monodromy(sys, frame_base, lasso(sys, base, C(0.0)), tol);
  const Mat2c m1 =
      loop_monodromy(sys, frame_base, lasso(sys, base, C(1.0)), tol);
  const Mat2c minf = out.stokes.m_inf();

  ThetaTuple th;
  th.theta0 = 2.0 * std::sqrt(-det2(sys.residue_at(C(0.0))));
  th.theta1 = 2.0 * std::sqrt(-det2(sys.residue_at(C(1.0))));
  th.theta_t = C(0.0);
  th.theta_inf = sys.theta_inf;

  out.lower.kind = MonodromyKind::P5;
  out.lower.matrices = {{"0", m0}, {"1", m1}, {"inf", minf}};
  out.lower.thetas = th;
  const MonodromyResiduals rl = validate(out.lower);
  out.lower.cyclic_residual = rl.cyclic;
  out.lower.trace_residual = rl.trace;
  out.lower.det_residual = rl.det;
  if (rl.cyclic > 2e-3)
    throw CyclicViolation("loop product with the Stokes matrix fails: " +
                          std::to_string(rl.cyclic));

  out.upper.kind = MonodromyKind::P5Tilde;
  out.upper.matrices = {
      {"0", m0}, {"1", Mat2c(m0 * m1 * inv2(m0))}, {"inf", minf}};
  out.upper.thetas = th;
  const MonodromyResiduals ru = validate(out.upper);
  out.upper.cyclic_residual = ru.cyclic;
  out.upper.trace_residual = ru.trace;
  out.upper.det_residual = ru.det;
  return out;
}

C tau5_logderiv(const P5State& state) {
  if (std::abs(state.t5) <= 1e-12)
    throw IndeterminateTau("t5 = 0");
  if (std::abs(state.y5) <= 1e-12)
    throw IndeterminateTau("y5 = 0");
  if (std::abs(state.u5) <= kChartTol)
    throw IndeterminateTau("u5 = 0");
  const ThetaCombo cb = combos(state.thetas);
  const C p = state.z5 - (state.z5 + cb.top) / state.y5;
  const C q =
      state.z5 + state.thetas.theta0 - state.y5 * (state.z5 + cb.mid);
  const C rational = -state.z5 - cb.half_inf - p * q / state.t5;

  const Mat2c a0 = a05_matrix(state), a1 = a15_matrix(state);
  const C th0 = state.thetas.theta0, th1 = state.thetas.theta1,
          thi = state.thetas.theta_inf;
  const C quarter =
      (th0 * th0 / 4.0 + th1 * th1 / 4.0 - thi * thi / 4.0) / state.t5;
  const C traced =
      quarter +
      tr2(Mat2c(Mat2c(a0 / state.t5 + 0.5 * sigma3<double>()) * a1));
  if (std::abs(rational - traced) >
      1e-9 * std::max(1.0, std::abs(rational)))
    throw ConstraintViolation("tau log-derivative routes disagree");
  return rational;
}

C sigma5_of(const P5State& state) {
  const ThetaCombo cb = combos(state.thetas);
  return cb.half_inf * state.t5 + state.t5 * tau5_logderiv(state);
}

}  // namespace isolab
