// Rank-2 systems with regular points {0, 1} and one irregular point of rank
// one at infinity: parametrization, isomonodromic flow in the exponential
// coupling t5, canonical sector frames at infinity, Stokes multipliers, the
// two loop-basis presentations of the monodromy, and tau-function data.
#pragma once

#include <vector>

#include "isolab/algebra.hpp"
#include "isolab/errors.hpp"
#include "isolab/monodromy.hpp"
#include "isolab/rng.hpp"

namespace isolab {

struct P5State {
  C t5;
  C z5, u5, y5;
  ThetaTuple thetas;  // theta0, theta1, theta_inf used; theta_t unused (0)
};

// Residues in the (z5, u5, y5) chart.  Both have determinant -theta^2/4 by
// construction, and diag(A0 + A1) = -(theta_inf/2) sigma3.
Mat2c a05_matrix(const P5State& s);
Mat2c a15_matrix(const P5State& s);

// Poles {0, 1} plus the constant diagonal part (t5/2) sigma3.
LinearSystem assemble5(const P5State& state);

// Recover the chart from residues (s supplies thetas and t5).
P5State p5_from_residues(const Mat2c& a0, const Mat2c& a1, const C& t5,
                         const ThetaTuple& thetas);

// Random state with exponents held away from the integers and the chart
// kept clear of its coordinate singularities.
P5State p5_random(Rng& rng, const C& t5);

// Isomonodromic flow to t5_target along the straight segment (which must
// stay clear of t5 = 0).  Integrates the residue matrices, re-extracts the
// chart.
P5State idm5_flow(const P5State& state, const C& t5_target,
                  double tol = 1e-10);

// Coefficients Psi_1..Psi_terms of the formal expansion
// (I + sum Psi_m lambda^-m) exp((t5 lambda/2 - theta_inf/2 ln lambda) sigma3)
// at the irregular point.
std::vector<Mat2c> irregular_tail(const LinearSystem& sys, int terms);

// One canonical sector frame.  Sector k covers
// -3pi/2 + pi k < arg(lambda t5) < pi/2 + pi k on the universal cover; the
// frame is anchored on the sector's central neutral ray at radius R,
// continued inward to the matching radius, and carried along quarter arcs
// to the two dominance hubs it shares with its neighbours.
struct CanonicalFrame {
  int k = 0;
  double radius_outer = 0.0;   // anchor radius R
  double radius_inner = 0.0;   // matching radius
  double anchor_angle = 0.0;   // cover angle of the central ray
  C ray_point;                 // inner point of the central ray
  Mat2c at_ray;                // frame there
  C hub_lower_point, hub_upper_point;
  Mat2c at_hub_lower, at_hub_upper;
  // Each boundary ray of the sector is the central ray of a neighbouring
  // sector, so a frame re-anchored there agrees with this sector's solution
  // only in the column that is recessive throughout the dominance zone lying
  // between the two rays (the other column picks up a Stokes multiple of it).
  // This records the worst relative disagreement of those shared columns
  // after continuation to the central inner point: a well-posedness check of
  // the anchoring, independent of the hub route.
  double boundary_anchor_mismatch = 0.0;
};

CanonicalFrame canonical_frames(const LinearSystem& sys, int k, double R,
                                double tol = 1e-10);

// Stokes multipliers extracted from consecutive canonical frames.
struct StokesData {
  C s0, s1;
  C theta_inf5;
  Mat2c S0;  // lower unipotent
  Mat2c S1;  // upper unipotent
  double off_pattern_residual = 0.0;   // worst discarded entry deviation
  double periodicity_residual = 0.0;   // sheet-shift consistency of frames
  double boundary_mismatch = 0.0;      // worst boundary-anchor agreement

  // S_k for any k via the two-step shift relation.
  Mat2c s_matrix(int k) const;
  // Monodromy at infinity in the canonical frame basis: S0 S1 e^{i pi
  // theta_inf sigma3}.
  Mat2c m_inf() const;
};

StokesData stokes_of(const LinearSystem& sys, double R = 0.0,
                     double tol = 1e-10);

// Both loop-basis presentations of the monodromy data plus the Stokes data
// they were assembled from.  "lower" uses a base point below the real axis
// (product M0 M1 Minf = I); "upper" is the conjugated presentation with
// Minf Mtilde1 Mtilde0 = I, Mtilde0 = M0, Mtilde1 = M0 M1 M0^{-1}.
struct M5Point {
  MonodromyPoint lower;
  MonodromyPoint upper;
  StokesData stokes;
};

M5Point m5_point(const LinearSystem& sys, double R = 0.0, double tol = 1e-10);

// d/dt5 of the tau-function logarithm; the rational chart expression and the
// matrix-trace expression must agree to 1e-9.
C tau5_logderiv(const P5State& state);

// sigma5 = ((theta0 + theta_inf)/2) t5 + t5 d/dt5 ln tau5.
C sigma5_of(const P5State& state);

}  // namespace isolab
