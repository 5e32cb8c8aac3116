#pragma once

#include "field.hpp"

#include <array>
#include <stdexcept>
#include <string>

namespace fiblab {

/// Angular factor contributed by the two torus directions. Applied once
/// inside the integral routines, never in densities.
inline constexpr double two_pi = 6.283185307179586476925286766559;
inline constexpr double angular_factor = two_pi * two_pi;

enum class Provider { product_p1xp1, hirzebruch };

struct PositivityError : std::runtime_error {
  int node_i, node_j;
  double value;
  PositivityError(const std::string& what, int i, int j, double val)
      : std::runtime_error(what + " at node (" + std::to_string(i) + "," + std::to_string(j) +
                           "), value " + std::to_string(val)),
        node_i(i), node_j(j), value(val) {}
};

/// The pair (omega, beta) of leafwise- and transverse-Kahler data on a
/// testbed fibration, with the splitting coefficient c = W12/W11 defining the
/// omega-orthogonal horizontal lift e_H = d/ds2 - c d/ds1.
///
/// Component conventions: comps are s-Hessians of potentials in the cylinder
/// coordinates s_i of the provider's reference momentum coordinates. The grid
/// axes are those reference momenta: (tau1, tau2) for the product, (x1, tau2)
/// for the Hirzebruch provider (x1 = reference fibre moment). In both cases
/// d/ds along an axis is tau(1-tau) d/dtau, and for the twisted provider the
/// second cylinder direction picks up the cross term a tau2 x1(1-x1) d/dx1.
struct FibrationGeometry {
  GridPtr grid;
  Provider provider = Provider::product_p1xp1;
  int twist = 0;         // Hirzebruch twist a (0 for product)
  double base_scale = 1; // kappa (product) or b (hirzebruch): beta area / 2pi

  ScalarField Phi;  // omega-potential perturbation relative to the reference
  ScalarField psi;  // beta-potential perturbation, base_only

  TwoForm W;       // components of omega
  TwoForm B;       // components of beta (B11 = B12 = 0, B22 base-only)
  ScalarField c;   // splitting coefficient W12/W11
};

/// omega = (Fubini-Study on the fibre factor, area 2pi) + i ddbar Phi,
/// beta = kappa (pullback Fubini-Study, area 2pi) + i ddbar psi.
FibrationGeometry make_product_geometry(GridPtr grid, const ScalarField& Phi,
                                        const ScalarField& psi, double kappa);

/// Twisted testbed on the Hirzebruch surface of twist a: the reference omega
/// has trapezoidal total moment image (fibre edges lattice length 1, base
/// sizes b and b+a at level k=1), beta = b (pullback Fubini-Study) + i ddbar psi.
FibrationGeometry make_hirzebruch_geometry(GridPtr grid, int a, double b,
                                           const ScalarField& Phi, const ScalarField& psi);

/// Cylinder-coordinate derivatives d/ds1, d/ds2 of nodal fields, with the
/// provider's chain rule.
ScalarField cyl_d1(const FibrationGeometry& g, const ScalarField& f);
ScalarField cyl_d2(const FibrationGeometry& g, const ScalarField& f);

/// comps[i][j] = d^2 F / ds_i ds_j on the collocation grid (mixed slot
/// symmetrized; the asymmetry defect is a discretization quantity that
/// refines to zero for smooth potentials).
TwoForm hessian_form(const FibrationGeometry& g, const ScalarField& potential);

/// Untwisted per-axis rule d/ds = tau(1-tau) d/dtau on a bare grid; agrees
/// with the geometry-aware version for the product provider.
TwoForm hessian_form(GridPtr grid, const ScalarField& potential);

struct SplitForm {
  TwoForm fibre;       // eta_F: pure (1,1) cylinder slot
  TwoForm horizontal;  // eta_H: scalar coefficient on (e_H, bar e_H)
  TwoForm mixed;       // remainder; the three re-sum to eta nodewise
};
SplitForm split_form(const TwoForm& eta, const FibrationGeometry& g);

enum class ContractKind { transverse, leafwise };

/// transverse: Lambda_beta eta = eta_HH / B22 with
/// eta_HH = eta22 - 2 c eta12 + c^2 eta11; leafwise: eta11 / W11.
ScalarField contract(const TwoForm& eta, ContractKind which, const FibrationGeometry& g);

// --- integration -----------------------------------------------------------
// Global integrals carry the (2pi)^2 angular factor; fibre integrals carry
// 2pi. Reductions run in fixed index order so results are bit-reproducible.

/// (2pi)^2 \iint f * wedge_density(eta, xi) ds1 ds2.
double integrate_global(const ScalarField& f, const TwoForm& eta, const TwoForm& xi);
double volume_global(const TwoForm& eta, const TwoForm& xi);

/// 2pi \int f * eta11 ds1 at each tau2 node (base_only result).
ScalarField integrate_fibre(const ScalarField& f, const TwoForm& eta);

/// Fibrewise average of f against the fibre volume density eta11 (no 2pi).
ScalarField fibre_average(const ScalarField& f, const TwoForm& eta);

/// Global average of f against the eta^xi volume.
double global_average(const ScalarField& f, const TwoForm& eta, const TwoForm& xi);

/// Fibre area / 2pi at each tau2 node; identically 1 up to quadrature for
/// admissible potentials.
ScalarField fibre_area(const FibrationGeometry& g);

enum class LaplaceKind { transverse, leafwise };

/// transverse: (d^2_{s2} f)/B22 on base_only f (throws std::invalid_argument
/// otherwise); leafwise: (d^2_{s1} f)/W11 fibrewise on any field.
ScalarField laplacian(const ScalarField& f, LaplaceKind which, const FibrationGeometry& g);

/// 1D operator diag(tau2(1-tau2)) * dtau2: d/ds2 acting on base profiles.
Eigen::MatrixXd base_ds_matrix(const Grid& grid);

/// Generator of the 2-torus action with its fibrewise and transverse
/// Hamiltonians. h_F has fibrewise average zero; h is base_only with global
/// average zero; h_F_mean is the base_only fibrewise mean of the full
/// omega-Hamiltonian, so k h + h_F + h_F_mean is the omega_k-holomorphy
/// potential up to an additive constant.
struct TorusField {
  std::array<int, 2> gen{0, 0};
  ScalarField h_F;
  ScalarField h;
  ScalarField h_F_mean;
};

TorusField potentials(std::array<int, 2> gen, const FibrationGeometry& g);

/// Geometry with omega-potential Phi + dPhi and beta-potential psi + dpsi.
FibrationGeometry shift(const FibrationGeometry& g, const ScalarField& dPhi,
                        const ScalarField& dpsi);
FibrationGeometry shift(const FibrationGeometry& g, double dPhi_scale, const ScalarField& dPhi,
                        double dpsi_scale, const ScalarField& dpsi);

/// Gradient pairing of the transverse metric: <df, dg>_beta =
/// 2 (e_H f)(e_H g)/B22, with e_H f = d_{s2}f - c d_{s1}f. Normalized so the
/// transverse Laplacian satisfies Delta_beta = -1/2 d* d.
ScalarField grad_pairing_beta(const FibrationGeometry& g, const ScalarField& f,
                              const ScalarField& h);

/// Fibrewise analogue: 2 (d_{s1}f)(d_{s1}g)/W11.
ScalarField grad_pairing_fibre(const FibrationGeometry& g, const ScalarField& f,
                               const ScalarField& h);

}  // namespace fiblab
