#include "geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace fiblab {

namespace {

ScalarField cyl_d1_impl(GridPtr grid, const ScalarField& f) {
  ScalarField d = dtau1(f);
  for (int i = 0; i < grid->n1; ++i) {
    const double w = grid->nodes1[i] * (1.0 - grid->nodes1[i]);
    for (int j = 0; j < grid->n2; ++j) d.v[grid->idx(i, j)] *= w;
  }
  return d;
}

ScalarField cyl_d2_impl(GridPtr grid, int twist, const ScalarField& f) {
  ScalarField d = dtau2(f);
  for (int j = 0; j < grid->n2; ++j) {
    const double w = grid->nodes2[j] * (1.0 - grid->nodes2[j]);
    for (int i = 0; i < grid->n1; ++i) d.v[grid->idx(i, j)] *= w;
  }
  if (twist != 0) {
    // ds2 picks up the fibre cross term a tau2 x1(1-x1) d/dx1 because the
    // reference fibre moment x1 depends on the base cylinder coordinate.
    ScalarField d1 = dtau1(f);
    for (int i = 0; i < grid->n1; ++i) {
      const double wx = grid->nodes1[i] * (1.0 - grid->nodes1[i]);
      for (int j = 0; j < grid->n2; ++j) {
        d.v[grid->idx(i, j)] += twist * grid->nodes2[j] * wx * d1.v[grid->idx(i, j)];
      }
    }
    d.axis = Axis::total_space;
  }
  return d;
}

TwoForm hessian_impl(GridPtr grid, int twist, const ScalarField& F) {
  TwoForm h = make_zero_form(grid);
  h.from_potential = true;
  ScalarField d1 = cyl_d1_impl(grid, F);
  ScalarField d2 = cyl_d2_impl(grid, twist, F);
  ScalarField d11 = cyl_d1_impl(grid, d1);
  ScalarField d12 = cyl_d2_impl(grid, twist, d1);
  ScalarField d21 = cyl_d1_impl(grid, d2);
  ScalarField d22 = cyl_d2_impl(grid, twist, d2);
  for (int k = 0; k < grid->size(); ++k) {
    h.c11[k] = d11.v[k];
    h.c12[k] = 0.5 * (d12.v[k] + d21.v[k]);
    h.c22[k] = d22.v[k];
  }
  return h;
}

void require_base_only(const ScalarField& f, const char* who) {
  if (f.axis != Axis::base_only) {
    throw std::invalid_argument(std::string(who) + ": field must be base_only");
  }
}

void check_positivity(const FibrationGeometry& g) {
  const auto& gr = *g.grid;
  for (int i = 0; i < gr.n1; ++i) {
    for (int j = 0; j < gr.n2; ++j) {
      const int k = gr.idx(i, j);
      if (!(g.W.c11[k] > 0.0)) {
        throw PositivityError("leafwise Kahler violated: W11 <= 0", i, j, g.W.c11[k]);
      }
      if (!(g.B.c22[k] > 0.0)) {
        throw PositivityError("transverse Kahler violated: B22 <= 0", i, j, g.B.c22[k]);
      }
    }
  }
}

void finish_geometry(FibrationGeometry& g) {
  check_positivity(g);
  g.c = ScalarField{g.grid, Axis::total_space, std::vector<double>(g.grid->size())};
  for (int k = 0; k < g.grid->size(); ++k) g.c.v[k] = g.W.c12[k] / g.W.c11[k];
}

}  // namespace

ScalarField cyl_d1(const FibrationGeometry& g, const ScalarField& f) {
  return cyl_d1_impl(g.grid, f);
}

ScalarField cyl_d2(const FibrationGeometry& g, const ScalarField& f) {
  return cyl_d2_impl(g.grid, g.twist, f);
}

TwoForm hessian_form(const FibrationGeometry& g, const ScalarField& potential) {
  return hessian_impl(g.grid, g.twist, potential);
}

TwoForm hessian_form(GridPtr grid, const ScalarField& potential) {
  return hessian_impl(grid, 0, potential);
}

FibrationGeometry make_product_geometry(GridPtr grid, const ScalarField& Phi,
                                        const ScalarField& psi, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("make_product_geometry: kappa must be > 0");
  require_base_only(psi, "make_product_geometry(psi)");

  FibrationGeometry g;
  g.grid = grid;
  g.provider = Provider::product_p1xp1;
  g.twist = 0;
  g.base_scale = kappa;
  g.Phi = Phi;
  g.psi = psi;

  g.W = hessian_impl(grid, 0, Phi);
  g.B = hessian_impl(grid, 0, psi);
  for (int i = 0; i < grid->n1; ++i) {
    const double w1 = grid->nodes1[i] * (1.0 - grid->nodes1[i]);
    for (int j = 0; j < grid->n2; ++j) {
      const int k = grid->idx(i, j);
      const double w2 = grid->nodes2[j] * (1.0 - grid->nodes2[j]);
      g.W.c11[k] += w1;
      g.B.c22[k] += kappa * w2;
    }
  }
  finish_geometry(g);
  return g;
}

FibrationGeometry make_hirzebruch_geometry(GridPtr grid, int a, double b,
                                           const ScalarField& Phi, const ScalarField& psi) {
  if (a < 0) throw std::invalid_argument("make_hirzebruch_geometry: twist a must be >= 0");
  if (!(b > 0.0)) throw std::invalid_argument("make_hirzebruch_geometry: base size b must be > 0");
  require_base_only(psi, "make_hirzebruch_geometry(psi)");

  FibrationGeometry g;
  g.grid = grid;
  g.provider = Provider::hirzebruch;
  g.twist = a;
  g.base_scale = b;
  g.Phi = Phi;
  g.psi = psi;

  // Reference components in the (x1, tau2) chart are polynomial:
  //   W11 = x(1-x), W12 = a t x(1-x), W22 = a^2 t^2 x(1-x) + a t(1-t) x.
  g.W = hessian_impl(grid, a, Phi);
  g.B = hessian_impl(grid, a, psi);
  for (int i = 0; i < grid->n1; ++i) {
    const double x = grid->nodes1[i];
    const double wx = x * (1.0 - x);
    for (int j = 0; j < grid->n2; ++j) {
      const int k = grid->idx(i, j);
      const double t = grid->nodes2[j];
      const double wt = t * (1.0 - t);
      g.W.c11[k] += wx;
      g.W.c12[k] += a * t * wx;
      g.W.c22[k] += a * a * t * t * wx + a * wt * x;
      g.B.c22[k] += b * wt;
    }
  }
  finish_geometry(g);
  return g;
}

SplitForm split_form(const TwoForm& eta, const FibrationGeometry& g) {
  SplitForm s{make_zero_form(g.grid), make_zero_form(g.grid), make_zero_form(g.grid)};
  for (int k = 0; k < g.grid->size(); ++k) {
    const double c = g.c.v[k];
    const double e11 = eta.c11[k], e12 = eta.c12[k], e22 = eta.c22[k];
    const double ehh = e22 - 2.0 * c * e12 + c * c * e11;
    const double em = e12 - c * e11;
    s.fibre.c11[k] = e11;
    s.fibre.c12[k] = c * e11;
    s.fibre.c22[k] = c * c * e11;
    s.horizontal.c22[k] = ehh;
    s.mixed.c12[k] = em;
    s.mixed.c22[k] = 2.0 * c * em;
  }
  return s;
}

ScalarField contract(const TwoForm& eta, ContractKind which, const FibrationGeometry& g) {
  ScalarField r{g.grid, Axis::total_space, std::vector<double>(g.grid->size())};
  for (int k = 0; k < g.grid->size(); ++k) {
    if (which == ContractKind::leafwise) {
      r.v[k] = eta.c11[k] / g.W.c11[k];
    } else {
      const double c = g.c.v[k];
      r.v[k] = (eta.c22[k] - 2.0 * c * eta.c12[k] + c * c * eta.c11[k]) / g.B.c22[k];
    }
  }
  return r;
}

double integrate_global(const ScalarField& f, const TwoForm& eta, const TwoForm& xi) {
  const auto& g = *f.grid;
  double acc = 0.0;
  for (int i = 0; i < g.n1; ++i) {
    double row = 0.0;
    for (int j = 0; j < g.n2; ++j) {
      const int k = g.idx(i, j);
      const double dens =
          eta.c11[k] * xi.c22[k] + eta.c22[k] * xi.c11[k] - 2.0 * eta.c12[k] * xi.c12[k];
      row += f.v[k] * dens * g.sweight2[j];
    }
    acc += row * g.sweight1[i];
  }
  return angular_factor * acc;
}

double volume_global(const TwoForm& eta, const TwoForm& xi) {
  ScalarField one = make_constant(eta.grid, 1.0);
  return integrate_global(one, eta, xi);
}

ScalarField integrate_fibre(const ScalarField& f, const TwoForm& eta) {
  const auto& g = *f.grid;
  ScalarField r{f.grid, Axis::base_only, std::vector<double>(g.size())};
  for (int j = 0; j < g.n2; ++j) {
    double acc = 0.0;
    for (int i = 0; i < g.n1; ++i) {
      const int k = g.idx(i, j);
      acc += f.v[k] * eta.c11[k] * g.sweight1[i];
    }
    for (int i = 0; i < g.n1; ++i) r.v[g.idx(i, j)] = two_pi * acc;
  }
  return r;
}

ScalarField fibre_average(const ScalarField& f, const TwoForm& eta) {
  const auto& g = *f.grid;
  ScalarField r{f.grid, Axis::base_only, std::vector<double>(g.size())};
  for (int j = 0; j < g.n2; ++j) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < g.n1; ++i) {
      const int k = g.idx(i, j);
      num += f.v[k] * eta.c11[k] * g.sweight1[i];
      den += eta.c11[k] * g.sweight1[i];
    }
    const double avg = num / den;
    for (int i = 0; i < g.n1; ++i) r.v[g.idx(i, j)] = avg;
  }
  return r;
}

double global_average(const ScalarField& f, const TwoForm& eta, const TwoForm& xi) {
  return integrate_global(f, eta, xi) / volume_global(eta, xi);
}

ScalarField fibre_area(const FibrationGeometry& g) {
  ScalarField one = make_constant(g.grid, 1.0);
  ScalarField a = integrate_fibre(one, g.W);
  for (auto& x : a.v) x /= two_pi;
  return a;
}

ScalarField laplacian(const ScalarField& f, LaplaceKind which, const FibrationGeometry& g) {
  if (which == LaplaceKind::transverse) {
    require_base_only(f, "laplacian(transverse)");
    ScalarField dd = cyl_d2(g, cyl_d2(g, f));
    for (int k = 0; k < g.grid->size(); ++k) dd.v[k] /= g.B.c22[k];
    dd.axis = Axis::base_only;
    return dd;
  }
  ScalarField dd = cyl_d1(g, cyl_d1(g, f));
  for (int k = 0; k < g.grid->size(); ++k) dd.v[k] /= g.W.c11[k];
  return dd;
}

Eigen::MatrixXd base_ds_matrix(const Grid& grid) {
  Eigen::MatrixXd d = grid.dtau2;
  for (int j = 0; j < grid.n2; ++j) {
    d.row(j) *= grid.nodes2[j] * (1.0 - grid.nodes2[j]);
  }
  return d;
}

TorusField potentials(std::array<int, 2> gen, const FibrationGeometry& g) {
  if (gen[0] == 0 && gen[1] == 0) {
    throw std::invalid_argument("potentials: generator (0,0) is not a torus direction");
  }
  const auto& gr = *g.grid;

  // omega-Hamiltonian: directional derivative of the full omega-potential.
  // Reference parts are closed-form; the perturbation goes through the
  // cylinder derivatives.
  ScalarField d1F = cyl_d1(g, g.Phi);
  ScalarField d2F = cyl_d2(g, g.Phi);
  for (int i = 0; i < gr.n1; ++i) {
    const double x = gr.nodes1[i];
    for (int j = 0; j < gr.n2; ++j) {
      const int k = gr.idx(i, j);
      d1F.v[k] += x;
      if (g.twist != 0) d2F.v[k] += g.twist * gr.nodes2[j] * x;
    }
  }
  ScalarField H_omega{g.grid, Axis::total_space, std::vector<double>(gr.size())};
  for (int k = 0; k < gr.size(); ++k) {
    H_omega.v[k] = gen[0] * d1F.v[k] + gen[1] * d2F.v[k];
  }

  // beta-moment coordinate: mu' = B22 in s2, realized as reference moment plus
  // d_{s2} psi (exact for Hessian perturbations).
  ScalarField mu = cyl_d2(g, g.psi);
  for (int i = 0; i < gr.n1; ++i) {
    for (int j = 0; j < gr.n2; ++j) {
      mu.v[gr.idx(i, j)] += g.base_scale * gr.nodes2[j];
    }
  }
  mu.axis = Axis::base_only;

  TorusField t;
  t.gen = gen;
  t.h_F_mean = fibre_average(H_omega, g.W);
  t.h_F = H_omega - t.h_F_mean;
  t.h_F.axis = Axis::total_space;
  ScalarField h = static_cast<double>(gen[1]) * mu;
  t.h = h - global_average(h, g.W, g.B);
  t.h.axis = Axis::base_only;
  return t;
}

FibrationGeometry shift(const FibrationGeometry& g, const ScalarField& dPhi,
                        const ScalarField& dpsi) {
  return shift(g, 1.0, dPhi, 1.0, dpsi);
}

FibrationGeometry shift(const FibrationGeometry& g, double dPhi_scale, const ScalarField& dPhi,
                        double dpsi_scale, const ScalarField& dpsi) {
  ScalarField Phi = g.Phi + dPhi_scale * dPhi;
  ScalarField psi = g.psi + dpsi_scale * dpsi;
  psi.axis = Axis::base_only;
  if (g.provider == Provider::product_p1xp1) {
    return make_product_geometry(g.grid, Phi, psi, g.base_scale);
  }
  return make_hirzebruch_geometry(g.grid, g.twist, g.base_scale, Phi, psi);
}

ScalarField grad_pairing_beta(const FibrationGeometry& g, const ScalarField& f,
                              const ScalarField& h) {
  ScalarField ef = cyl_d2(g, f) - g.c * cyl_d1(g, f);
  ScalarField eh = cyl_d2(g, h) - g.c * cyl_d1(g, h);
  ScalarField r{g.grid, Axis::total_space, std::vector<double>(g.grid->size())};
  for (int k = 0; k < g.grid->size(); ++k) {
    r.v[k] = 2.0 * ef.v[k] * eh.v[k] / g.B.c22[k];
  }
  return r;
}

ScalarField grad_pairing_fibre(const FibrationGeometry& g, const ScalarField& f,
                               const ScalarField& h) {
  ScalarField df = cyl_d1(g, f);
  ScalarField dh = cyl_d1(g, h);
  ScalarField r{g.grid, Axis::total_space, std::vector<double>(g.grid->size())};
  for (int k = 0; k < g.grid->size(); ++k) {
    r.v[k] = 2.0 * df.v[k] * dh.v[k] / g.W.c11[k];
  }
  return r;
}

}  // namespace fiblab
