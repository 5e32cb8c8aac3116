#include "grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fiblab {

std::vector<double> cheb_gauss_nodes(int n) {
  // tau_j = (1 - cos(theta_j))/2 = sin^2(theta_j/2), theta_j = (2j+1)pi/(2n).
  std::vector<double> tau(n);
  for (int j = 0; j < n; ++j) {
    const double half = (2 * j + 1) * std::numbers::pi / (4.0 * n);
    const double s = std::sin(half);
    tau[j] = s * s;
  }
  return tau;
}

std::vector<double> fejer_weights(int n) {
  // Fejer's first rule on [-1,1], halved for the map to [0,1]. Symmetric in
  // theta -> pi - theta, so the increasing-tau ordering needs no reindexing.
  std::vector<double> w(n);
  for (int j = 0; j < n; ++j) {
    const double theta = (2 * j + 1) * std::numbers::pi / (2.0 * n);
    double sum = 0.0;
    for (int m = 1; m <= n / 2; ++m) {
      sum += std::cos(2.0 * m * theta) / (4.0 * m * m - 1.0);
    }
    w[j] = (2.0 / n) * (1.0 - 2.0 * sum) / 2.0;
  }
  return w;
}

Eigen::MatrixXd diff_matrix(const std::vector<double>& nodes) {
  const int n = static_cast<int>(nodes.size());
  // Barycentric weights. For Chebyshev-Gauss nodes the closed form is
  // (-1)^j sin(theta_j); common scale factors cancel in the matrix.
  std::vector<double> b(n);
  for (int j = 0; j < n; ++j) {
    const double theta = (2 * j + 1) * std::numbers::pi / (2.0 * n);
    b[j] = ((j % 2) ? -1.0 : 1.0) * std::sin(theta);
  }
  Eigen::MatrixXd d(n, n);
  for (int j = 0; j < n; ++j) {
    double diag = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k == j) continue;
      d(j, k) = (b[k] / b[j]) / (nodes[j] - nodes[k]);
      diag -= d(j, k);
    }
    d(j, j) = diag;  // negative-sum trick: rows annihilate constants exactly
  }
  return d;
}

GridPtr make_grid(int n1, int n2) {
  if (n1 < 4 || n2 < 4) {
    throw std::invalid_argument("make_grid: need at least 4 nodes per axis");
  }
  auto g = std::make_shared<Grid>();
  g->n1 = n1;
  g->n2 = n2;
  g->nodes1 = cheb_gauss_nodes(n1);
  g->nodes2 = cheb_gauss_nodes(n2);
  g->quad1 = fejer_weights(n1);
  g->quad2 = fejer_weights(n2);
  g->sweight1.resize(n1);
  g->sweight2.resize(n2);
  for (int i = 0; i < n1; ++i) {
    g->sweight1[i] = g->quad1[i] / (g->nodes1[i] * (1.0 - g->nodes1[i]));
  }
  for (int j = 0; j < n2; ++j) {
    g->sweight2[j] = g->quad2[j] / (g->nodes2[j] * (1.0 - g->nodes2[j]));
  }
  g->dtau1 = diff_matrix(g->nodes1);
  g->dtau2 = diff_matrix(g->nodes2);
  return g;
}

}  // namespace fiblab
