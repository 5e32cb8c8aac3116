#include "curvature.hpp"

#include <cmath>

namespace fiblab {

namespace {

ScalarField log_field(const ScalarField& f) {
  ScalarField r = f;
  for (auto& x : r.v) x = std::log(x);
  return r;
}

}  // namespace

TwoForm leafwise_ricci(const FibrationGeometry& g) {
  ScalarField lw{g.grid, Axis::total_space, std::vector<double>(g.grid->size())};
  for (int k = 0; k < g.grid->size(); ++k) lw.v[k] = std::log(g.W.c11[k]);
  return -1.0 * hessian_form(g, lw);
}

ScalarField leafwise_scalar(const FibrationGeometry& g) {
  return contract(leafwise_ricci(g), ContractKind::leafwise, g);
}

std::pair<TwoForm, ScalarField> transverse_ricci_scalar(const FibrationGeometry& g) {
  ScalarField lb = log_field(ScalarField{g.grid, Axis::base_only, g.B.c22});
  TwoForm ric = -1.0 * hessian_form(g, lb);
  ScalarField s = contract(ric, ContractKind::transverse, g);
  s.axis = Axis::base_only;
  return {ric, s};
}

ScalarField total_scalar(const FibrationGeometry& g, double k) {
  const auto& gr = *g.grid;
  TwoForm G = g.W + k * g.B;
  ScalarField logdet{g.grid, Axis::total_space, std::vector<double>(gr.size())};
  for (int m = 0; m < gr.size(); ++m) {
    const double det = G.c11[m] * G.c22[m] - G.c12[m] * G.c12[m];
    const double tr = G.c11[m] + G.c22[m];
    if (!(det > 0.0) || !(tr > 0.0)) {
      const double lmin = 0.5 * (tr - std::sqrt(std::max(tr * tr - 4.0 * det, 0.0)));
      throw PositivityError("omega_k not positive definite", m / gr.n2, m % gr.n2, lmin);
    }
    logdet.v[m] = std::log(det);
  }
  TwoForm hess = hessian_form(g, logdet);
  ScalarField s{g.grid, Axis::total_space, std::vector<double>(gr.size())};
  for (int m = 0; m < gr.size(); ++m) {
    const double det = G.c11[m] * G.c22[m] - G.c12[m] * G.c12[m];
    const double gi11 = G.c22[m] / det, gi12 = -G.c12[m] / det, gi22 = G.c11[m] / det;
    s.v[m] = -(gi11 * hess.c11[m] + 2.0 * gi12 * hess.c12[m] + gi22 * hess.c22[m]);
  }
  return s;
}

TwoForm weil_petersson(const FibrationGeometry& g) {
  const auto& gr = *g.grid;
  TwoForm rho = leafwise_ricci(g);
  ScalarField rho_w = wedge_density(rho, g.W);
  ScalarField w_w = wedge_density(g.W, g.W);
  const double s_hat_f = averages(g).S_hat_F;

  TwoForm alpha = make_zero_form(g.grid);
  for (int j = 0; j < gr.n2; ++j) {
    double irho = 0.0, iww = 0.0;
    for (int i = 0; i < gr.n1; ++i) {
      const int k = gr.idx(i, j);
      irho += rho_w.v[k] * gr.sweight1[i];
      iww += w_w.v[k] * gr.sweight1[i];
    }
    const double a22 = -irho + 0.5 * s_hat_f * iww;
    for (int i = 0; i < gr.n1; ++i) alpha.c22[gr.idx(i, j)] = a22;
  }
  return alpha;
}

Averages averages(const FibrationGeometry& g) {
  TwoForm rho = leafwise_ricci(g);
  auto [ric_b, s_beta] = transverse_ricci_scalar(g);
  const double vol = volume_global(g.W, g.B);
  ScalarField one = make_constant(g.grid, 1.0);

  Averages a{};
  a.S_hat_F = integrate_global(one, rho, g.B) / vol;
  a.lambda = integrate_global(one, ric_b + rho, g.W) / vol;

  // S_hat_pi needs alpha_pi, whose normalization uses S_hat_F; rebuild the
  // fibre integrals here rather than recursing through weil_petersson.
  const auto& gr = *g.grid;
  ScalarField rho_w = wedge_density(rho, g.W);
  ScalarField w_w = wedge_density(g.W, g.W);
  ScalarField lam_alpha{g.grid, Axis::base_only, std::vector<double>(gr.size())};
  for (int j = 0; j < gr.n2; ++j) {
    double irho = 0.0, iww = 0.0;
    for (int i = 0; i < gr.n1; ++i) {
      const int k = gr.idx(i, j);
      irho += rho_w.v[k] * gr.sweight1[i];
      iww += w_w.v[k] * gr.sweight1[i];
    }
    const double a22 = -irho + 0.5 * a.S_hat_F * iww;
    for (int i = 0; i < gr.n1; ++i) {
      lam_alpha.v[gr.idx(i, j)] = a22 / g.B.c22[gr.idx(i, j)];
    }
  }
  a.S_hat_pi = integrate_global(s_beta - lam_alpha, g.W, g.B) / vol;
  return a;
}

double average_total_scalar(const FibrationGeometry& g, double k) {
  ScalarField s = total_scalar(g, k);
  TwoForm G = g.W + k * g.B;
  return global_average(s, G, G);
}

ScalarField twisted_base_scalar(const FibrationGeometry& g) {
  TwoForm rho = leafwise_ricci(g);
  auto [ric_b, s_beta] = transverse_ricci_scalar(g);
  (void)s_beta;
  return contract(ric_b + rho, ContractKind::transverse, g);
}

double twisted_base_consistency(const FibrationGeometry& g) {
  const auto& gr = *g.grid;
  ScalarField path1 = twisted_base_scalar(g);
  ScalarField avg1 = fibre_average(path1, g.W);

  auto [ric_b, s_beta] = transverse_ricci_scalar(g);
  (void)ric_b;
  TwoForm alpha = weil_petersson(g);
  ScalarField s_f = leafwise_scalar(g);
  const double s_hat_f = averages(g).S_hat_F;
  ScalarField detw{g.grid, Axis::total_space, std::vector<double>(gr.size())};
  for (int m = 0; m < gr.size(); ++m) {
    detw.v[m] = (s_f.v[m] - s_hat_f) * (g.W.c11[m] * g.W.c22[m] - g.W.c12[m] * g.W.c12[m]);
  }

  double defect = 0.0;
  for (int j = 0; j < gr.n2; ++j) {
    double corr = 0.0;
    for (int i = 0; i < gr.n1; ++i) corr += detw.v[gr.idx(i, j)] * gr.sweight1[i];
    const int k0 = gr.idx(0, j);
    const double path2 = s_beta.v[k0] - alpha.c22[k0] / g.B.c22[k0] - corr / g.B.c22[k0];
    defect = std::max(defect, std::abs(avg1.v[k0] - path2));
  }
  return defect;
}

Eigen::MatrixXd lichnerowicz_matrix(const FibrationGeometry& g) {
  const auto& gr = *g.grid;
  Eigen::MatrixXd ds = base_ds_matrix(gr);
  Eigen::VectorXd b = base_profile(ScalarField{g.grid, Axis::base_only, g.B.c22});
  Eigen::VectorXd s = base_profile(transverse_ricci_scalar(g).second);

  Eigen::MatrixXd dss = ds * ds;
  Eigen::MatrixXd inner = dss;
  for (int j = 0; j < gr.n2; ++j) inner.row(j) /= b[j];
  Eigen::MatrixXd fourth = dss * inner;
  Eigen::MatrixXd second = ds;
  for (int j = 0; j < gr.n2; ++j) second.row(j) *= s[j];
  Eigen::MatrixXd l = fourth + ds * second;
  for (int j = 0; j < gr.n2; ++j) l.row(j) /= b[j];
  return l;
}

ScalarField lichnerowicz_transverse(const FibrationGeometry& g, const ScalarField& phi) {
  if (phi.axis != Axis::base_only) {
    throw std::invalid_argument("lichnerowicz_transverse: phi must be base_only");
  }
  Eigen::VectorXd p = lichnerowicz_matrix(g) * base_profile(phi);
  return from_base_profile(g.grid, p);
}

ScalarField operator_P(const FibrationGeometry& g, const ScalarField& phi) {
  ScalarField l = lichnerowicz_transverse(g, phi);
  TwoForm rho = leafwise_ricci(g);
  ScalarField lam_rho_h = contract(rho, ContractKind::transverse, g);
  ScalarField dphi = laplacian(phi, LaplaceKind::transverse, g);
  ScalarField grad = grad_pairing_beta(g, lam_rho_h, phi);
  ScalarField r{g.grid, Axis::total_space, std::vector<double>(g.grid->size())};
  for (int k = 0; k < g.grid->size(); ++k) {
    r.v[k] = l.v[k] - lam_rho_h.v[k] * dphi.v[k] - 0.5 * grad.v[k];
  }
  return r;
}

double mixed_pairing(const FibrationGeometry& g, std::array<int, 2> gen, const ScalarField& phi) {
  const auto& gr = *g.grid;
  TwoForm rho = leafwise_ricci(g);
  ScalarField dphi = cyl_d2(g, phi);
  double acc = 0.0;
  for (int i = 0; i < gr.n1; ++i) {
    double row = 0.0;
    for (int j = 0; j < gr.n2; ++j) {
      const int k = gr.idx(i, j);
      const double ham = gen[0] * g.W.c11[k] + gen[1] * g.W.c12[k];
      const double rho_m = rho.c12[k] - g.c.v[k] * rho.c11[k];
      row += ham * rho_m * dphi.v[k] * gr.sweight2[j];
    }
    acc += row * gr.sweight1[i];
  }
  return angular_factor * acc;
}

ScalarField linearized_twisted(const FibrationGeometry& g, const ScalarField& phi) {
  ScalarField l = lichnerowicz_transverse(g, phi);
  TwoForm rho = leafwise_ricci(g);
  ScalarField lam_rho_h = contract(rho, ContractKind::transverse, g);
  ScalarField dphi = laplacian(phi, LaplaceKind::transverse, g);
  ScalarField s_beta = transverse_ricci_scalar(g).second;
  ScalarField grad = grad_pairing_beta(g, s_beta, phi);
  ScalarField r{g.grid, Axis::total_space, std::vector<double>(g.grid->size())};
  for (int k = 0; k < g.grid->size(); ++k) {
    r.v[k] = -l.v[k] - lam_rho_h.v[k] * dphi.v[k] + 0.5 * grad.v[k];
  }
  return r;
}

ScalarField base_moment(const FibrationGeometry& g) {
  const auto& gr = *g.grid;
  ScalarField mu = cyl_d2(g, g.psi);
  for (int i = 0; i < gr.n1; ++i) {
    for (int j = 0; j < gr.n2; ++j) mu.v[gr.idx(i, j)] += g.base_scale * gr.nodes2[j];
  }
  mu.axis = Axis::base_only;
  return mu;
}

double fine_expansion_defect(const FibrationGeometry& g, double k) {
  ScalarField s_k = total_scalar(g, k);
  ScalarField s_f = leafwise_scalar(g);
  TwoForm rho = leafwise_ricci(g);
  ScalarField s_beta = transverse_ricci_scalar(g).second;
  ScalarField lam_rho_h = contract(rho, ContractKind::transverse, g);
  ScalarField lam_w = contract(g.W, ContractKind::transverse, g);
  ScalarField lap = laplacian(lam_w, LaplaceKind::leafwise, g);

  double defect = 0.0;
  for (int m = 0; m < g.grid->size(); ++m) {
    const double target = s_beta.v[m] + lam_rho_h.v[m] + lap.v[m];
    defect = std::max(defect, std::abs(k * (s_k.v[m] - s_f.v[m]) - target));
  }
  return defect;
}

CurvatureBundle curvature_bundle(const FibrationGeometry& g) {
  CurvatureBundle b;
  b.S_F = leafwise_scalar(g);
  b.rho = leafwise_ricci(g);
  auto [ric, s_beta] = transverse_ricci_scalar(g);
  b.ric_beta = ric;
  b.S_beta = s_beta;
  b.alpha_pi = weil_petersson(g);
  Averages a = averages(g);
  b.S_hat_F = a.S_hat_F;
  b.lambda = a.lambda;
  b.S_hat_pi = a.S_hat_pi;
  b.S_hat_k = [g](double k) { return average_total_scalar(g, k); };
  return b;
}

}  // namespace fiblab
