#include "flow.hpp"

#include <Eigen/LU>
#include <cmath>

namespace fiblab {

namespace {

/// Round-reference Lichnerowicz operator on one axis: B L f = (f''/B)'' + (S f')'
/// with B = scale * tau(1-tau), S = 2/scale. Frozen stabilizer for the flow.
Eigen::MatrixXd reference_lichnerowicz(const std::vector<double>& nodes,
                                       const Eigen::MatrixXd& dtau, double scale) {
  const int n = static_cast<int>(nodes.size());
  Eigen::MatrixXd ds = dtau;
  for (int j = 0; j < n; ++j) ds.row(j) *= nodes[j] * (1.0 - nodes[j]);
  Eigen::MatrixXd dss = ds * ds;
  Eigen::MatrixXd inner = dss;
  for (int j = 0; j < n; ++j) inner.row(j) /= scale * nodes[j] * (1.0 - nodes[j]);
  Eigen::MatrixXd l = dss * inner + (2.0 / scale) * dss;
  for (int j = 0; j < n; ++j) l.row(j) /= scale * nodes[j] * (1.0 - nodes[j]);
  return l;
}

struct Stabilizer {
  Eigen::PartialPivLU<Eigen::MatrixXd> fibre_lu;
  Eigen::PartialPivLU<Eigen::MatrixXd> base_lu;
  double dt = -1.0;

  void prepare(const FibrationGeometry& g, double dt_now) {
    if (dt == dt_now) return;
    const auto& gr = *g.grid;
    Eigen::MatrixXd a1 = reference_lichnerowicz(gr.nodes1, gr.dtau1, 1.0);
    Eigen::MatrixXd a2 = reference_lichnerowicz(gr.nodes2, gr.dtau2, g.base_scale);
    fibre_lu.compute(Eigen::MatrixXd::Identity(gr.n1, gr.n1) + dt_now * a1);
    base_lu.compute(Eigen::MatrixXd::Identity(gr.n2, gr.n2) + dt_now * a2);
    dt = dt_now;
  }
};

ScalarField fibre_defect(const FibrationGeometry& g) {
  ScalarField s_f = leafwise_scalar(g);
  return s_f - fibre_average(s_f, g.W);
}

ScalarField base_defect(const FibrationGeometry& g) {
  ScalarField tw = twisted_base_scalar(g);
  const double s_pi = averages(g).S_hat_pi;
  ScalarField d = fibre_average(tw, g.W) - s_pi;
  d.axis = Axis::base_only;
  return d;
}

FlowState assemble_state(FibrationGeometry g, double t) {
  auto [rf, rb] = residuals(g);
  return FlowState{std::move(g), t, rf, rb};
}

FlowState try_step(const FlowState& state, double dt, const FlowOptions& opts,
                   Stabilizer& stab) {
  const auto& g = state.g;
  const auto& gr = *g.grid;

  ScalarField upd_phi = fibre_defect(g);
  ScalarField upd_psi = base_defect(g);

  if (opts.stabilized) {
    stab.prepare(g, dt);
    Eigen::MatrixXd cols(gr.n1, gr.n2);
    for (int i = 0; i < gr.n1; ++i)
      for (int j = 0; j < gr.n2; ++j) cols(i, j) = upd_phi.v[gr.idx(i, j)];
    cols = stab.fibre_lu.solve(cols);
    for (int i = 0; i < gr.n1; ++i)
      for (int j = 0; j < gr.n2; ++j) upd_phi.v[gr.idx(i, j)] = cols(i, j);
    Eigen::VectorXd p = stab.base_lu.solve(base_profile(upd_psi));
    upd_psi = from_base_profile(g.grid, p);
  }

  // gauge fixing: fibrewise average of the Phi-update zero, global average of
  // the psi-update zero
  upd_phi = upd_phi - fibre_average(upd_phi, g.W);
  upd_psi = upd_psi - global_average(upd_psi, g.W, g.B);
  upd_psi.axis = Axis::base_only;

  FibrationGeometry next = shift(state.g, dt, upd_phi, dt, upd_psi);
  return assemble_state(std::move(next), state.t + dt);
}

}  // namespace

std::pair<double, double> residuals(const FibrationGeometry& g) {
  ScalarField df = fibre_defect(g);
  ScalarField tw = twisted_base_scalar(g);
  const double s_pi = averages(g).S_hat_pi;
  return {max_abs(df), max_abs(tw - s_pi)};
}

double energy_proxy(const FibrationGeometry& g) {
  ScalarField df = fibre_defect(g);
  ScalarField tw = twisted_base_scalar(g);
  const double s_pi = averages(g).S_hat_pi;
  ScalarField db = tw - s_pi;
  return integrate_global(df * df, g.W, g.B) + integrate_global(db * db, g.W, g.B);
}

FlowState flow_init(const FibrationGeometry& g) { return assemble_state(g, 0.0); }

FlowState flow_step(const FlowState& state, double dt, const FlowOptions& opts) {
  if (!(dt > 0.0)) throw std::invalid_argument("flow_step: dt must be > 0");
  Stabilizer stab;
  double dt_now = dt;
  for (int attempt = 0; attempt <= opts.max_halvings; ++attempt) {
    try {
      return try_step(state, dt_now, opts, stab);
    } catch (const PositivityError&) {
      dt_now *= 0.5;
    }
  }
  throw StepSizeFailure("flow_step: positivity could not be restored after " +
                        std::to_string(opts.max_halvings) + " halvings (t = " +
                        std::to_string(state.t) + ", r_fibre = " + std::to_string(state.r_fibre) +
                        ", r_base = " + std::to_string(state.r_base) + ")");
}

FlowResult solve(const FibrationGeometry& g, const FlowOptions& opts) {
  FlowResult result;
  Stabilizer stab;
  FlowState state = flow_init(g);
  result.trace.push_back({0, 0.0, 0.0, state.r_fibre, state.r_base, energy_proxy(state.g)});

  double dt = opts.dt;
  int step = 0;
  while (std::max(state.r_fibre, state.r_base) >= opts.tol && step < opts.max_steps) {
    bool advanced = false;
    double dt_now = dt;
    for (int attempt = 0; attempt <= opts.max_halvings; ++attempt) {
      try {
        state = try_step(state, dt_now, opts, stab);
        advanced = true;
        break;
      } catch (const PositivityError&) {
        dt_now *= 0.5;
      }
    }
    if (!advanced) {
      result.g = state.g;
      result.steps = step;
      result.message = "step-size failure: positivity lost at every tried dt";
      result.converged = false;
      return result;
    }
    ++step;
    result.trace.push_back(
        {step, state.t, dt_now, state.r_fibre, state.r_base, energy_proxy(state.g)});
  }

  result.g = state.g;
  result.steps = step;
  result.converged = std::max(state.r_fibre, state.r_base) < opts.tol;
  if (!result.converged) {
    result.message = "not converged after " + std::to_string(step) + " steps";
  }

  const int transient = static_cast<int>(result.trace.size() / 10) + 1;
  double prev = 0.0;
  for (size_t i = 0; i < result.trace.size(); ++i) {
    const double r = std::max(result.trace[i].r_fibre, result.trace[i].r_base);
    if (static_cast<int>(i) > transient && r > prev * (1.0 + 1e-9)) {
      result.monotone_after_transient = false;
    }
    prev = r;
  }
  return result;
}

}  // namespace fiblab
