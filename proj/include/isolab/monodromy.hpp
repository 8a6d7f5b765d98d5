// Monodromy of rank-2 linear systems dPsi/dlambda = A(lambda) Psi with
// simple poles (plus an optional constant coefficient term).  Provides the
// system/path types, analytic continuation of fundamental frames (adaptive
// RK5(4)), local frames at regular singular points, asymptotic frames at a
// regular point at infinity, loop builders, and assembled monodromy points
// with their invariant residuals.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "isolab/algebra.hpp"
#include "isolab/errors.hpp"

namespace isolab {

struct Pole {
  C position;
  Mat2c residue;
};

struct LinearSystem {
  std::vector<Pole> poles;
  Mat2c poly_part = Mat2c::Zero();  // constant term of A(lambda)
  C theta_inf{0.0};                 // formal exponent at infinity

  // A(lambda) = poly_part + sum residue / (lambda - position).
  Mat2c coefficient(const C& lambda) const;
  // Length scale of the pole configuration: max of 1, pole moduli and
  // pairwise separations.  Proximity guards are stated relative to it.
  double scale() const;
  // Distance from p to the nearest pole other than the one at p itself.
  double min_gap(const C& p) const;
  bool has_poly_part() const;
  // Residue of the pole nearest to `position` (must match within 1e-9*scale).
  const Mat2c& residue_at(const C& position) const;
};

// Piecewise-linear path.  `vertices` traces the full polyline including both
// endpoints; for loops the first and last vertex coincide with `base_point`.
struct Path {
  C base_point;
  std::vector<C> vertices;
  int orientation = 0;  // +1 counterclockwise loop, -1 clockwise loop, 0 open
};

Path segment_path(const C& from, const C& to);
// Counterclockwise loop around `pole` from `base`: straight spoke to the
// circle of radius min_gap(pole)/3, a regular polygon once around, and the
// spoke back.
Path lasso(const LinearSystem& sys, const C& base, const C& pole,
           int circle_vertices = 24);
// Loop along a circle enclosing every pole, reached by a radial spoke from
// `base`.  orientation -1 gives the clockwise loop (lambda -> lambda
// e^{-2 pi i}), +1 the counterclockwise one.
Path big_circle_loop(const LinearSystem& sys, const C& base, int orientation,
                     int circle_vertices = 32);
// Open polyline along the circular arc |lambda| = radius from angle_from to
// angle_to (radians, interpolated linearly).
Path arc_path(double radius, double angle_from, double angle_to,
              int vertices_per_half_turn = 16);

// Propagator of the system along the path: Psi(end) = T * Psi(start) for
// every solution continued along it.  tol is the relative and absolute
// integration tolerance, admissible range [1e-13, 1e-6].  Throws
// PoleProximity if the path comes within 1e-3 * scale of a pole and
// StepUnderflow if the step controller collapses.
Mat2c transfer(const LinearSystem& sys, const Path& path, double tol = 1e-10);

// Local fundamental frame at a regular singular point:
//   F(lambda) = (psi0 + psi1 w) w^{(exponent/2) sigma3},  w = lambda - pole,
// with det psi0 = 1 and the +exponent/2 eigenvector in the first column.
// One correction term; principal branch of w^{...}.
struct LocalFrame {
  C pole;
  C exponent;
  Mat2c psi0;
  Mat2c psi1;
  double radius;
  Mat2c eval(const C& lambda) const;
};

// Throws ResonantExponent when the local exponent is within 1e-6 of an
// integer (the correction term and the power frame degenerate there).
LocalFrame local_frame(const LinearSystem& sys, const C& pole, double radius);

// Expansion coefficients Psi_1..Psi_terms of the solution normalized at a
// regular point at infinity,
//   Psi(lambda) = (I + sum_m Psi_m lambda^{-m}) lambda^{-(theta_inf/2) s3},
// for a system with poly_part = 0 whose residues sum to -(theta_inf/2) s3.
std::vector<Mat2c> infinity_tail(const LinearSystem& sys, int terms);
// The frame above evaluated at `lambda` (principal branch of log lambda).
Mat2c frame_at_regular_infinity(const LinearSystem& sys, const C& lambda,
                                int terms = 4);
// Value at `base` of the infinity-normalized solution: asymptotic frame at
// |lambda| = 10^3 * scale on the ray arg lambda = pi/2 - 0.1, continued to
// `base` by integration.
Mat2c frame_from_infinity(const LinearSystem& sys, const C& base,
                          double tol = 1e-10, int terms = 4);

// Monodromy of a loop in the basis of the given frame at the loop's base
// point: frame^{-1} T(loop) frame.
Mat2c loop_monodromy(const LinearSystem& sys, const Mat2c& base_frame,
                     const Path& loop, double tol = 1e-10);

struct ThetaTuple {
  C theta0{0.0}, theta1{0.0}, theta_t{0.0}, theta_inf{0.0};
};

enum class MonodromyKind { P6, P5, P5Tilde };

// A point on the monodromy manifold: the loop matrices keyed by singularity
// label ("0", "1", "t", "inf"), the exponents, and the residuals of the
// defining invariants (cyclic product, traces, determinants).
struct MonodromyPoint {
  MonodromyKind kind = MonodromyKind::P6;
  std::map<std::string, Mat2c> matrices;
  ThetaTuple thetas;
  double cyclic_residual = 0.0;
  double trace_residual = 0.0;
  double det_residual = 0.0;

  const Mat2c& m(const std::string& key) const;
};

struct MonodromyResiduals {
  double cyclic = 0.0;
  double trace = 0.0;
  double det = 0.0;
};

// Recompute the invariant residuals of a monodromy point from its matrices:
// cyclic product per kind, |tr M - 2 cos(pi theta)| at the regular
// singularities (plus infinity for the all-regular kind), |det M - 1|.
MonodromyResiduals validate(const MonodromyPoint& mp);

// Standard base point for the three-finite-pole system: midpoint of the
// outer poles raised into the upper half plane.
C p6_base_point(const C& t6);

// Full monodromy point of an all-regular system (poles at 0, 1 and
// optionally t) in the basis normalized at infinity.  Loops are
// counterclockwise lassos, applied in order of increasing real part; the
// infinity matrix is integrated along the clockwise big circle.  Throws
// CyclicViolation if the cyclic residual exceeds 1e-5.  When `thetas` is
// not given, exponents are derived from the residues as 2 sqrt(-det A).
MonodromyPoint monodromy_point_p6(const LinearSystem& sys, const C& base,
                                  double tol = 1e-10,
                                  std::optional<ThetaTuple> thetas = {});

}  // namespace isolab
