#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

namespace fiblab {

/// Tensor-product collocation grid on the open momentum square (0,1)^2.
///
/// Nodes per axis are Chebyshev-Gauss points (roots of T_n mapped to (0,1)),
/// so every node is strictly interior and endpoint-degenerate expressions are
/// never evaluated. Each axis carries quadrature weights for \int_0^1 f dtau
/// (Fejer's first rule) and a dense nodal d/dtau operator built from
/// barycentric interpolation, exact through polynomial degree n-1.
struct Grid {
  int n1 = 0;  ///< node count in the fibre momentum coordinate
  int n2 = 0;  ///< node count in the base momentum coordinate

  std::vector<double> nodes1, nodes2;  // strictly interior, increasing
  std::vector<double> quad1, quad2;    // weights for \int_0^1 f(tau) dtau

  // Weights for the cylinder measure ds = dtau / (tau (1-tau)); used by every
  // global/fibre integral of invariant densities.
  std::vector<double> sweight1, sweight2;

  Eigen::MatrixXd dtau1, dtau2;  // nodal d/dtau per axis

  int size() const { return n1 * n2; }
  int idx(int i, int j) const { return i * n2 + j; }
};

using GridPtr = std::shared_ptr<const Grid>;

/// Build a grid with n1 x n2 interior collocation nodes. Throws
/// std::invalid_argument for n < 4.
GridPtr make_grid(int n1, int n2);

/// Chebyshev-Gauss nodes on (0,1), increasing.
std::vector<double> cheb_gauss_nodes(int n);

/// Fejer-1 quadrature weights on (0,1) matching cheb_gauss_nodes(n).
std::vector<double> fejer_weights(int n);

/// Barycentric differentiation matrix for an arbitrary node set.
Eigen::MatrixXd diff_matrix(const std::vector<double>& nodes);

}  // namespace fiblab
