#pragma once

#include "flow.hpp"
#include "invariants.hpp"
#include "oracle.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fiblab {

/// Flat, typed key-value configuration. Every field has a documented default;
/// unknown keys are rejected.
struct ExperimentConfig {
  std::string experiment = "round-baseline";
  std::string provider = "product";  // product | hirzebruch
  int a = 1;                         // hirzebruch twist
  double b = 2.0;                    // hirzebruch base size
  double kappa = 1.0;                // product base scale
  int n1 = 48, n2 = 48;
  std::string phi;                   // perturbation expression, e.g. "0.05*sin2d + 0.01*cheb:2:1"
  std::string psi;                   // base-only perturbation expression
  std::vector<double> k_list = {8, 16, 32};
  std::vector<double> eps_list = {0.05, 0.1, 0.2};
  std::uint64_t seed = 12345;
  std::optional<double> tol;         // per-experiment default when unset
  double dt = 0.1;
  int max_steps = 10000;
  int num_geometries = 5;            // invariance sweep
  int num_potentials = 3;            // invariance sweep
  bool quiet = false;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// Evaluate a perturbation expression on a grid. base_only = true restricts
/// the basis to tau2-only terms. Grammar: signed sum of coef*name terms with
/// names sinx, siny, sin2d, bump, bumpy, cheb:i:j, poly:i:j.
ScalarField parse_perturbation(GridPtr grid, const std::string& expr, bool base_only);

FibrationGeometry geometry_from_config(const ExperimentConfig& cfg, GridPtr grid);

/// Deterministic pseudo-random perturbations for sweeps.
struct PerturbationSampler {
  std::uint64_t state;
  explicit PerturbationSampler(std::uint64_t seed);
  double uniform();  // in (-1, 1), reproducible across platforms
  ScalarField random_phi(GridPtr grid, double amplitude);
  ScalarField random_psi(GridPtr grid, double amplitude);
  ScalarField random_transverse(GridPtr grid, double amplitude);
};

struct ExperimentReport {
  std::string experiment;
  nlohmann::ordered_json json;                  // config echo + metrics + verdicts
  std::map<std::string, std::string> csv;       // table name -> CSV body
  bool pass = false;
};

/// Dispatch on cfg.experiment: compute, round-baseline, invariance-sweep,
/// adiabatic-sweep, fine-expansion, identity-suite, futaki-routes,
/// oracle-consistency, solve, verify-all. Throws ConfigError for unknown names.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Write report JSON and per-table CSVs under out_dir, namespaced by
/// experiment. Returns the list of file paths written.
std::vector<std::string> write_report(const ExperimentReport& report, const std::string& out_dir);

std::string format_double(double x);  // deterministic shortest round-trip form

}  // namespace fiblab
