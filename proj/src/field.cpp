#include "field.hpp"

#include <cmath>
#include <stdexcept>

namespace fiblab {

namespace {

void check_same_grid(const ScalarField& a, const ScalarField& b) {
  if (a.grid != b.grid) throw std::invalid_argument("fields on different grids");
}

Axis combine(Axis a, Axis b) { return a == b ? a : Axis::total_space; }

using RowMat = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMatMut = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

ScalarField make_constant(GridPtr g, double value, Axis axis) {
  ScalarField f{g, axis, std::vector<double>(g->size(), value)};
  return f;
}

ScalarField make_field(GridPtr g, const std::function<double(double, double)>& fn, Axis axis) {
  ScalarField f{g, axis, std::vector<double>(g->size())};
  for (int i = 0; i < g->n1; ++i)
    for (int j = 0; j < g->n2; ++j) f.v[g->idx(i, j)] = fn(g->nodes1[i], g->nodes2[j]);
  return f;
}

ScalarField make_base_field(GridPtr g, const std::function<double(double)>& fn) {
  return make_field(g, [&](double, double t2) { return fn(t2); }, Axis::base_only);
}

ScalarField make_fibre_field(GridPtr g, const std::function<double(double)>& fn) {
  return make_field(g, [&](double t1, double) { return fn(t1); }, Axis::fibre_profile);
}

TwoForm make_zero_form(GridPtr g) {
  TwoForm w{g, false, std::vector<double>(g->size(), 0.0), std::vector<double>(g->size(), 0.0),
            std::vector<double>(g->size(), 0.0)};
  return w;
}

#define FIBLAB_NODEWISE_OP(name, expr)                                    \
  ScalarField operator name(const ScalarField& a, const ScalarField& b) { \
    check_same_grid(a, b);                                                \
    ScalarField r{a.grid, combine(a.axis, b.axis), a.v};                  \
    for (size_t k = 0; k < r.v.size(); ++k) r.v[k] = expr;                \
    return r;                                                             \
  }

FIBLAB_NODEWISE_OP(+, a.v[k] + b.v[k])
FIBLAB_NODEWISE_OP(-, a.v[k] - b.v[k])
FIBLAB_NODEWISE_OP(*, a.v[k] * b.v[k])
FIBLAB_NODEWISE_OP(/, a.v[k] / b.v[k])
#undef FIBLAB_NODEWISE_OP

ScalarField operator*(double s, const ScalarField& a) {
  ScalarField r = a;
  for (auto& x : r.v) x *= s;
  return r;
}

ScalarField operator+(const ScalarField& a, double s) {
  ScalarField r = a;
  for (auto& x : r.v) x += s;
  return r;
}

ScalarField operator-(const ScalarField& a, double s) { return a + (-s); }

TwoForm operator+(const TwoForm& a, const TwoForm& b) {
  TwoForm r = a;
  r.from_potential = a.from_potential && b.from_potential;
  for (size_t k = 0; k < r.c11.size(); ++k) {
    r.c11[k] += b.c11[k];
    r.c12[k] += b.c12[k];
    r.c22[k] += b.c22[k];
  }
  return r;
}

TwoForm operator-(const TwoForm& a, const TwoForm& b) {
  TwoForm r = a;
  r.from_potential = a.from_potential && b.from_potential;
  for (size_t k = 0; k < r.c11.size(); ++k) {
    r.c11[k] -= b.c11[k];
    r.c12[k] -= b.c12[k];
    r.c22[k] -= b.c22[k];
  }
  return r;
}

TwoForm operator*(double s, const TwoForm& a) {
  TwoForm r = a;
  for (size_t k = 0; k < r.c11.size(); ++k) {
    r.c11[k] *= s;
    r.c12[k] *= s;
    r.c22[k] *= s;
  }
  return r;
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double x : f.v) m = std::max(m, std::abs(x));
  return m;
}

double max_abs_diff(const TwoForm& a, const TwoForm& b) {
  double m = 0.0;
  for (size_t k = 0; k < a.c11.size(); ++k) {
    m = std::max(m, std::abs(a.c11[k] - b.c11[k]));
    m = std::max(m, std::abs(a.c12[k] - b.c12[k]));
    m = std::max(m, std::abs(a.c22[k] - b.c22[k]));
  }
  return m;
}

ScalarField dtau1(const ScalarField& f) {
  const auto& g = *f.grid;
  ScalarField r{f.grid, f.axis == Axis::base_only ? Axis::base_only : Axis::total_space,
                std::vector<double>(g.size())};
  RowMat in(f.v.data(), g.n1, g.n2);
  RowMatMut out(r.v.data(), g.n1, g.n2);
  out = g.dtau1 * in;
  return r;
}

ScalarField dtau2(const ScalarField& f) {
  const auto& g = *f.grid;
  ScalarField r{f.grid, f.axis == Axis::fibre_profile ? Axis::fibre_profile : Axis::total_space,
                std::vector<double>(g.size())};
  RowMat in(f.v.data(), g.n1, g.n2);
  RowMatMut out(r.v.data(), g.n1, g.n2);
  out = in * g.dtau2.transpose();
  return r;
}

double base_only_defect(const ScalarField& f) { return max_abs(dtau1(f)); }

Eigen::VectorXd base_profile(const ScalarField& f) {
  const auto& g = *f.grid;
  Eigen::VectorXd p(g.n2);
  for (int j = 0; j < g.n2; ++j) p[j] = f.v[g.idx(0, j)];
  return p;
}

ScalarField from_base_profile(GridPtr g, const Eigen::VectorXd& p) {
  ScalarField f{g, Axis::base_only, std::vector<double>(g->size())};
  for (int i = 0; i < g->n1; ++i)
    for (int j = 0; j < g->n2; ++j) f.v[g->idx(i, j)] = p[j];
  return f;
}

ScalarField wedge_density(const TwoForm& a, const TwoForm& b) {
  ScalarField r{a.grid, Axis::total_space, std::vector<double>(a.grid->size())};
  for (size_t k = 0; k < r.v.size(); ++k) {
    r.v[k] = a.c11[k] * b.c22[k] + a.c22[k] * b.c11[k] - 2.0 * a.c12[k] * b.c12[k];
  }
  return r;
}

}  // namespace fiblab
