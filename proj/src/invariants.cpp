#include "invariants.hpp"
#include "oracle.hpp"

#include <cmath>
#include <sstream>

namespace fiblab {

double transverse_futaki(const FibrationGeometry& g, std::array<int, 2> gen) {
  TorusField t = potentials(gen, g);
  ScalarField s_f = leafwise_scalar(g);
  ScalarField twisted = twisted_base_scalar(g);
  Averages a = averages(g);

  double fut = integrate_global(t.h_F * (s_f - a.S_hat_F), g.W, g.B);
  fut += integrate_global(t.h * (twisted - a.lambda), g.W, g.B);
  fut += 0.5 * integrate_global(t.h * (s_f - a.S_hat_F), g.W, g.W);
  return fut;
}

double submersion_futaki(const FibrationGeometry& g, std::array<int, 2> gen) {
  const auto& gr = *g.grid;
  TorusField t = potentials(gen, g);
  ScalarField s_f = leafwise_scalar(g);
  ScalarField s_hat_b = fibre_average(s_f, g.W);
  ScalarField h_omega = t.h_F + t.h_F_mean;

  // base integral of the fibre integral, with the combined angular factor
  double term1 = 0.0;
  for (int j = 0; j < gr.n2; ++j) {
    double fib = 0.0;
    for (int i = 0; i < gr.n1; ++i) {
      const int k = gr.idx(i, j);
      fib += h_omega.v[k] * (s_f.v[k] - s_hat_b.v[k]) * g.W.c11[k] * gr.sweight1[i];
    }
    fib *= g.B.c22[gr.idx(0, j)] * gr.sweight2[j];
    term1 += fib;
  }
  term1 *= angular_factor;

  auto [ric_b, s_beta] = transverse_ricci_scalar(g);
  (void)ric_b;
  TwoForm alpha = weil_petersson(g);
  ScalarField lam_alpha = contract(alpha, ContractKind::transverse, g);
  Averages a = averages(g);
  double term2 = integrate_global(t.h * (s_beta - lam_alpha - a.S_hat_pi), g.W, g.B);
  return term1 + term2;
}

double moment_pairing(const FibrationGeometry& g, std::array<int, 2> gen) {
  TorusField t = potentials(gen, g);
  ScalarField s_f = leafwise_scalar(g);
  ScalarField h_omega = t.h_F + t.h_F_mean;
  TwoForm rho_h = split_form(leafwise_ricci(g), g).horizontal;
  ScalarField lam_rho_h = contract(rho_h, ContractKind::transverse, g);
  ScalarField s_beta = transverse_ricci_scalar(g).second;
  Averages a = averages(g);

  double fut = integrate_global(h_omega * (s_f - a.S_hat_F), g.W, g.B);
  fut += integrate_global(t.h * (s_beta + lam_rho_h - a.S_hat_pi), g.W, g.B);
  fut += 0.5 * integrate_global(t.h * (s_f - a.S_hat_F), g.W, g.W);
  return fut;
}

double classical_futaki(const FibrationGeometry& g, std::array<int, 2> gen, double k) {
  TorusField t = potentials(gen, g);
  ScalarField s_k = total_scalar(g, k);
  TwoForm G = g.W + k * g.B;
  const double s_hat_k = global_average(s_k, G, G);
  ScalarField h_k = k * t.h + t.h_F + t.h_F_mean;
  return integrate_global(h_k * (s_k - s_hat_k), G, G);
}

double leading_term(const FibrationGeometry& g, std::array<int, 2> gen) {
  if (gen[1] == 0) {
    throw std::invalid_argument("leading_term: generator needs a base component");
  }
  TorusField t = potentials(gen, g);
  ScalarField s_f = leafwise_scalar(g);
  const double s_hat_f = averages(g).S_hat_F;
  return integrate_global(t.h * (s_f - s_hat_f), g.W, g.B);
}

double twisted_map_functional(const FibrationGeometry& g, std::array<int, 2> gen,
                              const TwoForm& alpha) {
  TorusField t = potentials(gen, g);
  ScalarField lam = contract(alpha, ContractKind::transverse, g);
  return integrate_global(t.h * lam, g.W, g.B);
}

AdiabaticTable adiabatic_table(const FibrationGeometry& g, std::array<int, 2> gen,
                               const std::vector<double>& ks) {
  AdiabaticTable table;
  const double fut_t = transverse_futaki(g, gen);
  std::vector<std::pair<double, double>> pts;
  for (double k : ks) {
    AdiabaticRow row;
    row.k = k;
    row.fut_k_scaled = classical_futaki(g, gen, k) / (2.0 * k);
    row.fut_transverse = fut_t;
    row.difference = std::abs(row.fut_k_scaled - fut_t);
    table.rows.push_back(row);
    pts.emplace_back(k, row.difference);
  }
  table.fitted_order = richardson_order(pts);
  return table;
}

FutakiRecord futaki_record(const FibrationGeometry& g, std::array<int, 2> gen,
                           const std::vector<double>& ks) {
  FutakiRecord r;
  r.gen = gen;
  r.transverse = transverse_futaki(g, gen);
  r.submersion = submersion_futaki(g, gen);
  r.pairing_62 = moment_pairing(g, gen);
  r.leading = gen[1] != 0 ? leading_term(g, gen) : 0.0;
  for (double k : ks) r.classical_k.emplace_back(k, classical_futaki(g, gen, k));
  r.geometry_fingerprint = geometry_fingerprint(g);
  return r;
}

std::string geometry_fingerprint(const FibrationGeometry& g) {
  double phi_sum = 0.0, psi_sum = 0.0;
  for (double x : g.Phi.v) phi_sum += x;
  for (double x : g.psi.v) psi_sum += x;
  std::ostringstream os;
  os.precision(17);
  os << (g.provider == Provider::product_p1xp1 ? "product" : "hirzebruch") << ":a=" << g.twist
     << ":scale=" << g.base_scale << ":grid=" << g.grid->n1 << "x" << g.grid->n2
     << ":phi=" << phi_sum << ":psi=" << psi_sum;
  return os.str();
}

}  // namespace fiblab
