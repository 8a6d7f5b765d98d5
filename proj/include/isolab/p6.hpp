// The two-parameter-per-pole chart (z, u) for traceless rank-2 Fuchsian
// systems with poles {0, 1, t}, the isomonodromic flow in t, and the derived
// scalar functions: the Painlevé-VI transcendent y6, the tau-function
// log-derivative, and its sigma form.
#pragma once

#include <vector>

#include "isolab/algebra.hpp"
#include "isolab/errors.hpp"
#include "isolab/monodromy.hpp"
#include "isolab/rng.hpp"

namespace isolab {

// Chart coordinates attached to one finite pole.  s is a bookkeeping scale
// used only by the degeneration pipeline; nothing in this module evolves it.
struct P6Coord {
  C z{0.0};
  C u{1.0};
  C s{1.0};
};

struct P6State {
  C t6;
  ThetaTuple thetas;  // exponents at 0, 1, t and infinity
  P6Coord c0, c1, ct;
};

// Residue in the (z, u) chart: [[z + th/2, -u z], [(z + th)/u, -z - th/2]].
// Eigenvalues are +-th/2 for every (z, u).
Mat2c residue_matrix(const C& z, const C& u, const C& theta);

// Inverse chart: recover (z, u) from a traceless residue with exponent theta.
// Fails (ConstraintViolation) on the chart's coordinate singularities
// (z = 0 or vanishing upper-right entry).
P6Coord coords_from_residue(const Mat2c& a, const C& theta, const C& s);

// Build the rank-2 system with poles {0, 1, t6}.  Validates the three scalar
// normalization sums and the per-pole spectra; poles are sorted by real part
// for downstream monodromy labeling.
LinearSystem assemble(const P6State& state);

// Draw a random state on the constraint manifold: exponents at 0, 1 and
// infinity are sampled away from the integers, the residue at t closes the
// sum rule, and its exponent is read off from the determinant.
P6State p6_random(Rng& rng, const C& t6);

// First-integral drift of a state: max deviation of tr A_nu, det A_nu
// (nu = 0, 1) and det(theta_inf/2 sigma3 + A0 + A1) from their pinned values.
double first_integral_drift(const P6State& state);

// Isomonodromic flow of the residues from state.t6 to t6_target along the
// straight segment, integrating dA_nu/dt = [A_t, A_nu]/(t - nu) for
// nu = 0, 1 and the sum-rule companion for A_t.  Re-projects onto the
// isospectral manifold whenever the first integrals drift beyond 1e-11,
// then re-extracts the chart coordinates.  s carries over unchanged.
P6State schlesinger_flow(const P6State& state, const C& t6_target,
                         double tol = 1e-10);

// The Painlevé-VI transcendent attached to the state.  All three equivalent
// rational expressions are evaluated and must agree to 1e-9.
C y6_of(const P6State& state);

// Scalar data sampled along a flow trajectory.
struct Tau6Sample {
  C t6;
  C dlog_tau;          // d/dt log tau
  C sigma_hat;         // t(t-1) dlog_tau
  C sigma_hat_prime;   // its t-derivative, evaluated pointwise
  C sigma_hat_quad;    // sigma_hat(t0) + cumulative quadrature of the prime
};

struct Tau6Report {
  std::vector<Tau6Sample> samples;
  double max_dual_mismatch = 0.0;   // two pointwise forms of sigma_hat_prime
  double max_point_mismatch = 0.0;  // sigma_hat vs t*prime - tr(A0 At)
  double max_quad_mismatch = 0.0;   // quadrature vs pointwise sigma_hat
};

// Evaluate tau-function data on a sampled trajectory (uniformly spaced in
// the flow parameter, at least five samples with an even interval count).
// The two algebraically equal forms of sigma_hat_prime must agree to 1e-7
// per sample; otherwise GridTooCoarse (the usual cause is a trajectory
// sampled too coarsely to stay on the constraint manifold).
Tau6Report tau6_sigma6(const std::vector<P6State>& trajectory);

// The exponent-negating reflection at infinity: theta_inf -> -theta_inf,
// theta_nu -> sign_nu * theta_nu, with the chart transform that realizes
// conjugation of every residue by sigma1.  signs entries must be +-1.
P6State reflect_infinity(const P6State& state, const int (&signs)[3]);

}  // namespace isolab
