#pragma once

#include "geometry.hpp"

#include <functional>

namespace fiblab {

/// Leafwise Ricci form rho = -Hess_s log W11. The mixed and horizontal
/// components are generally nonzero; the leafwise contraction reproduces the
/// scalar curvature of each restricted fibre metric.
TwoForm leafwise_ricci(const FibrationGeometry& g);

/// S_F = rho11 / W11; identically 2 on round fibres.
ScalarField leafwise_scalar(const FibrationGeometry& g);

/// Ric beta = -Hess_s log B22 (pure 22-slot, base_only) and its transverse
/// contraction S(beta).
std::pair<TwoForm, ScalarField> transverse_ricci_scalar(const FibrationGeometry& g);

/// Scalar curvature of the honest Kahler metric omega_k = omega + k beta,
/// computed exactly from the 2D invariant formula
///   S = -sum_ij G^{ij} (Hess_s log det G)_{ij},  G = W + k B.
/// Throws PositivityError (with the minimal eigenvalue and node) if omega_k
/// is not positive definite.
ScalarField total_scalar(const FibrationGeometry& g, double k);

struct Averages {
  double S_hat_F;   // fibrewise average scalar curvature (global form)
  double lambda;    // n Int (Ric beta + rho) ^ beta^{n-1} ^ omega^m / Int omega^m beta^n
  double S_hat_pi;  // average twisted scalar curvature
};
Averages averages(const FibrationGeometry& g);

/// Volume average of total_scalar(g, k); expands as S_hat_F + lambda/k + O(k^-2).
double average_total_scalar(const FibrationGeometry& g, double k);

/// Weil-Petersson form on the base: fibre integration (unit angular
/// normalization) of -rho^omega + (S_hat_F/2) omega^2. base_only 22-slot.
TwoForm weil_petersson(const FibrationGeometry& g);

/// Twisted transverse scalar curvature Lambda_beta(Ric beta + rho); the
/// contraction sees only the horizontal part of rho.
ScalarField twisted_base_scalar(const FibrationGeometry& g);

/// Max defect between the fibrewise omega-average of twisted_base_scalar and
/// its reconstruction through the Weil-Petersson route
///   S(beta) - Lambda_beta alpha_pi - [Int (S_F - S_hat_F) det W ds1]/B22.
double twisted_base_consistency(const FibrationGeometry& g);

/// Nodal matrix of the transverse Lichnerowicz operator in its 1D invariant
/// reduction: B L f = (f''/B)'' + (S(beta) f')' with ' = d/ds2. Self-adjoint
/// and positive semidefinite with kernel spanned by 1 and the beta-moment
/// coordinate.
Eigen::MatrixXd lichnerowicz_matrix(const FibrationGeometry& g);

ScalarField lichnerowicz_transverse(const FibrationGeometry& g, const ScalarField& phi);

/// P phi = L_beta phi - Lambda_beta(rho_H) Delta_beta phi
///         - 1/2 < grad_beta Lambda_beta(rho_H), grad_beta phi >_beta.
ScalarField operator_P(const FibrationGeometry& g, const ScalarField& phi);

/// The mixed-curvature pairing that closes the adjoint identity for P:
///   (2pi)^2 Iint (a1 W11 + a2 W12)(rho12 - c rho11) d_{s2}phi ds1 ds2.
/// For every transverse potential phi and torus generator (a1, a2),
///   Int P(phi) h omega^beta + mixed_pairing = 0
/// where h is the generator's transverse holomorphy potential.
double mixed_pairing(const FibrationGeometry& g, std::array<int, 2> gen, const ScalarField& phi);

/// Linearization of t -> Lambda_{beta_t}(Ric beta_t + rho_H) at t = 0 for
/// beta_t = beta + t i ddbar phi:
///   -L_beta phi - Lambda_beta(rho_H) Delta_beta phi + 1/2 <grad S(beta), grad phi>_beta.
ScalarField linearized_twisted(const FibrationGeometry& g, const ScalarField& phi);

/// beta-moment coordinate as a base_only field (d/ds2 mu = B22); spans the
/// non-constant part of the Lichnerowicz kernel.
ScalarField base_moment(const FibrationGeometry& g);

/// Sup-norm defect of the adiabatic curvature expansion at level k:
///   max | k (S(omega_k) - S_F) - (S(beta) + Lambda_beta rho_H + Delta_F Lambda_beta omega) |.
double fine_expansion_defect(const FibrationGeometry& g, double k);

struct CurvatureBundle {
  ScalarField S_F;
  TwoForm rho;
  TwoForm ric_beta;
  ScalarField S_beta;
  TwoForm alpha_pi;
  double S_hat_F, lambda, S_hat_pi;
  std::function<double(double)> S_hat_k;
};
CurvatureBundle curvature_bundle(const FibrationGeometry& g);

}  // namespace fiblab
