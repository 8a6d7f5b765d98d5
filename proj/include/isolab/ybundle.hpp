// The rank-2 hypergeometric bundle Y(x): residue matrices, local frames at
// x = 0, 1, closed-form connection matrices built from Gamma factors, and the
// large-parameter constant frame K-hat.  This is the exactly solvable model
// everything else is calibrated against.
#pragma once

#include "isolab/algebra.hpp"
#include "isolab/errors.hpp"

namespace isolab {

struct HyperParams {
  C alpha, beta, gamma;

  C theta_inf() const { return alpha - beta; }        // Theta_{inf Y}
  C theta0() const { return C(1) - gamma; }           // Theta_{0 Y}
  C theta1() const { return gamma - C(1) - alpha - beta; }  // Theta_{1 Y}
};

struct YBundle {
  HyperParams params;
  Mat2c A0Y, A1Y;  // residues at 0 and 1; A0Y + A1Y = ((beta-alpha)/2) sigma3
  Mat2c G0, G1;    // local frames: Y ~ G^nu (I+O(x-nu)) (x-nu)^{(Theta/2)s3} C^nu
  Mat2c C0, C1;    // connection matrices (closed Gamma-factor form)
};

// Assemble the bundle from (alpha, beta, gamma); all three exponents must be
// off the integers by 1e-6.
YBundle y_bundle(const HyperParams& p);

// Closed-form monodromy of the bundle around pole nu in the normalized frame:
// (C^nu)^{-1} e^{i pi Theta_nu sigma3} C^nu.
Mat2c y_monodromy_closed(const YBundle& yb, int nu);

// The constant frame K-hat(kappa) of the special large-|1-gamma| asymptotics;
// requires |1-gamma| >= 10.
Mat2c y_asymptotic_frame(const HyperParams& p, int kappa);

// Same formula without the large-parameter gate (used internally by tests
// probing the decay rate).
Mat2c k_hat_matrix(const HyperParams& p, int kappa);

}  // namespace isolab
