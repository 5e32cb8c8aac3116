#pragma once

#include "curvature.hpp"

#include <string>
#include <vector>

namespace fiblab {

/// Three-integral transverse Futaki invariant of the generator:
///   Int h_F (S_F - S_hat_F) omega^beta
/// + Int h (Lambda_beta(Ric beta + rho) - lambda) omega^beta
/// + 1/2 Int h (S_F - S_hat_F) omega^2.
double transverse_futaki(const FibrationGeometry& g, std::array<int, 2> gen);

/// Fibre-integral route through the Weil-Petersson form:
///   Int_B (Int_{X/B} H_omega (S_F - S_hat_b) omega) beta
/// + Int h (S(beta) - Lambda_beta alpha_pi - S_hat_pi) omega^beta,
/// with S_hat_b the per-fibre average. Independent code path from
/// transverse_futaki; the two agree for every admissible geometry.
double submersion_futaki(const FibrationGeometry& g, std::array<int, 2> gen);

/// Moment-map pairing route:
///   Int H_omega (S_F - S_hat_F) omega^beta
/// + Int h (S(beta) + Lambda_beta rho_H - S_hat_pi) omega^beta
/// + 1/2 Int h (S_F - S_hat_F) omega^2,
/// with rho_H extracted through split_form.
double moment_pairing(const FibrationGeometry& g, std::array<int, 2> gen);

/// Classical Futaki invariant of omega_k = omega + k beta by direct
/// quadrature: Int h_k (S(omega_k) - S_hat_k) omega_k^2 with the full
/// holomorphy potential h_k = k h + H_omega.
double classical_futaki(const FibrationGeometry& g, std::array<int, 2> gen, double k);

/// Leading-order pairing Int h (S_F - S_hat_F) omega^beta; vanishes for every
/// transverse potential h. Requires a generator with base component.
double leading_term(const FibrationGeometry& g, std::array<int, 2> gen);

/// Int h Lambda_beta(alpha) omega^beta for a transverse (1,1)-form alpha.
double twisted_map_functional(const FibrationGeometry& g, std::array<int, 2> gen,
                              const TwoForm& alpha);

struct AdiabaticRow {
  double k;
  double fut_k_scaled;  // Fut_k / (2k)
  double fut_transverse;
  double difference;
};

struct AdiabaticTable {
  std::vector<AdiabaticRow> rows;
  double fitted_order;  // least-squares decay order of |difference| in k
};

AdiabaticTable adiabatic_table(const FibrationGeometry& g, std::array<int, 2> gen,
                               const std::vector<double>& ks);

struct FutakiRecord {
  std::array<int, 2> gen{0, 0};
  double transverse = 0;
  double submersion = 0;
  double pairing_62 = 0;
  double leading = 0;
  std::vector<std::pair<double, double>> classical_k;
  std::string geometry_fingerprint;
};

FutakiRecord futaki_record(const FibrationGeometry& g, std::array<int, 2> gen,
                           const std::vector<double>& ks);

std::string geometry_fingerprint(const FibrationGeometry& g);

}  // namespace fiblab
