#pragma once

#include "curvature.hpp"

#include <string>
#include <vector>

namespace fiblab {

struct StepSizeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FlowOptions {
  double dt = 0.1;
  int max_steps = 10000;
  double tol = 1e-6;         // sup-norm convergence tolerance
  bool stabilized = true;    // solve() default; step() callers may disable
  int max_halvings = 40;
};

/// Snapshot of the coupled flow on the potentials (Phi, psi).
struct FlowState {
  FibrationGeometry g;
  double t = 0.0;
  double r_fibre = 0.0;  // sup |S_F - fibrewise average|
  double r_base = 0.0;   // sup |Lambda_beta(Ric beta + rho_H) - S_hat_pi|
};

struct TracePoint {
  int step;
  double t, dt, r_fibre, r_base, energy;
};

struct FlowResult {
  FibrationGeometry g;
  bool converged = false;
  int steps = 0;
  std::vector<TracePoint> trace;
  std::string message;
  bool monotone_after_transient = true;
};

/// The two defect functions whose vanishing characterizes a zero of the
/// coupled moment map.
std::pair<double, double> residuals(const FibrationGeometry& g);

/// Int (S_F - avg)^2 omega^beta + Int (twisted - S_hat_pi)^2 omega^beta.
double energy_proxy(const FibrationGeometry& g);

FlowState flow_init(const FibrationGeometry& g);

/// One flow step: Phi <- Phi + dt K(S_F - fibrewise avg),
/// psi <- psi + dt K(fibre-averaged twisted defect), updates gauge-normalized
/// (fibrewise / global average zero). K is the identity in explicit mode and
/// the inverse of (I + dt A) with A the frozen round-reference Lichnerowicz
/// when opts.stabilized (same fixed points, unconditionally stable on the
/// linear model). Positivity failures halve dt and retry up to
/// opts.max_halvings, then throw StepSizeFailure.
FlowState flow_step(const FlowState& state, double dt, const FlowOptions& opts);

/// Iterate flow_step until max(r_fibre, r_base) < opts.tol or max_steps.
/// Non-convergence is reported in the result, never silently.
FlowResult solve(const FibrationGeometry& g, const FlowOptions& opts);

}  // namespace fiblab
