#include <doctest.h>

#include "grid.hpp"

#include <cmath>
#include <numbers>

using namespace fiblab;

TEST_CASE("nodes are strictly interior and increasing") {
  for (int n : {4, 16, 48, 96}) {
    auto nodes = cheb_gauss_nodes(n);
    REQUIRE(static_cast<int>(nodes.size()) == n);
    double prev = 0.0;
    for (double t : nodes) {
      CHECK(t > 0.0);
      CHECK(t < 1.0);
      CHECK(t > prev);
      prev = t;
    }
  }
}

TEST_CASE("quadrature integrates constants and polynomials") {
  for (int n : {8, 24, 48}) {
    auto g = make_grid(n, n);
    double total = 0.0;
    for (double w : g->quad1) total += w;
    CHECK(std::abs(total - 1.0) < 1e-12);

    // exact for degree <= n-1
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += std::pow(g->nodes1[i], 5) * g->quad1[i];
    CHECK(std::abs(acc - 1.0 / 6.0) < 1e-12);
  }
}

TEST_CASE("quadrature is spectrally accurate for analytic integrands") {
  auto g = make_grid(32, 32);
  double acc = 0.0;
  for (int i = 0; i < 32; ++i) acc += std::sin(std::numbers::pi * g->nodes1[i]) * g->quad1[i];
  CHECK(std::abs(acc - 2.0 / std::numbers::pi) < 1e-13);
}

TEST_CASE("differentiation exact for low-degree polynomials") {
  for (int n : {8, 32, 64}) {
    auto g = make_grid(n, n);
    // p(tau) = tau^(n-2), p' = (n-2) tau^(n-3)
    Eigen::VectorXd p(n), expect(n);
    for (int i = 0; i < n; ++i) {
      p[i] = std::pow(g->nodes1[i], n - 2);
      expect[i] = (n - 2) * std::pow(g->nodes1[i], n - 3);
    }
    Eigen::VectorXd d = g->dtau1 * p;
    double rel = 0.0;
    for (int i = 0; i < n; ++i) {
      rel = std::max(rel, std::abs(d[i] - expect[i]) / std::max(1.0, std::abs(expect[i])));
    }
    CHECK(rel < 1e-10);
  }
}

TEST_CASE("differentiation annihilates constants exactly") {
  auto g = make_grid(40, 8);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(40);
  CHECK((g->dtau1 * ones).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rejects tiny grids") {
  CHECK_THROWS_AS(make_grid(3, 8), std::invalid_argument);
}
