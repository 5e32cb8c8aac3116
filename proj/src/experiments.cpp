#include "experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace fiblab {

namespace {

using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// formatting

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::string build_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) out += ",";
    out += csv_escape(header[i]);
  }
  out += "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      out += csv_escape(row[i]);
    }
    out += "\n";
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// ---------------------------------------------------------------------------
// perturbation basis

double cheb_t(int n, double x) {
  if (n == 0) return 1.0;
  double tm = 1.0, t = x;
  for (int k = 1; k < n; ++k) {
    const double tn = 2.0 * x * t - tm;
    tm = t;
    t = tn;
  }
  return t;
}

struct PertTerm {
  double coef = 1.0;
  std::string name;
  int i = 0, j = 0;
};

std::vector<PertTerm> parse_terms(const std::string& expr) {
  std::vector<PertTerm> terms;
  std::string cur;
  std::vector<std::pair<double, std::string>> chunks;
  double sign = 1.0;
  size_t pos = 0;
  while (pos < expr.size()) {
    size_t next = expr.find_first_of("+-", pos);
    std::string chunk = expr.substr(pos, next == std::string::npos ? next : next - pos);
    chunk = trim(chunk);
    if (!chunk.empty()) chunks.emplace_back(sign, chunk);
    if (next == std::string::npos) break;
    sign = expr[next] == '-' ? -1.0 : 1.0;
    pos = next + 1;
  }
  for (auto& [sgn, chunk] : chunks) {
    PertTerm t;
    t.coef = sgn;
    std::string body = chunk;
    const auto star = chunk.find('*');
    if (star != std::string::npos) {
      const std::string num = trim(chunk.substr(0, star));
      size_t used = 0;
      t.coef *= std::stod(num, &used);
      if (used != num.size()) throw ConfigError("bad coefficient '" + num + "'");
      body = trim(chunk.substr(star + 1));
    }
    std::vector<std::string> parts;
    std::stringstream ss(body);
    std::string piece;
    while (std::getline(ss, piece, ':')) parts.push_back(trim(piece));
    if (parts.empty()) throw ConfigError("empty perturbation term");
    t.name = parts[0];
    if (parts.size() > 1) t.i = std::stoi(parts[1]);
    if (parts.size() > 2) t.j = std::stoi(parts[2]);
    terms.push_back(t);
  }
  return terms;
}

double eval_term(const PertTerm& t, double t1, double t2) {
  const double pi = std::numbers::pi;
  if (t.name == "sinx") return std::sin(pi * t1);
  if (t.name == "siny") return std::sin(pi * t2);
  if (t.name == "sin2d") return std::sin(pi * t1) * std::sin(pi * t2);
  if (t.name == "bump") return t1 * (1.0 - t1) * t2 * (1.0 - t2);
  if (t.name == "bumpy") return t2 * (1.0 - t2);
  if (t.name == "cheb") return cheb_t(t.i, 2.0 * t1 - 1.0) * cheb_t(t.j, 2.0 * t2 - 1.0);
  if (t.name == "poly") return std::pow(t1, t.i) * std::pow(t2, t.j);
  throw ConfigError("unknown perturbation basis '" + t.name + "'");
}

bool term_is_base_only(const PertTerm& t) {
  if (t.name == "siny" || t.name == "bumpy") return true;
  if (t.name == "cheb" || t.name == "poly") return t.i == 0;
  return false;
}

}  // namespace

std::string format_double(double x) {
  char buf[48];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, p);
}

ScalarField parse_perturbation(GridPtr grid, const std::string& expr, bool base_only) {
  const std::string trimmed = trim(expr);
  if (trimmed.empty()) {
    return make_constant(grid, 0.0, base_only ? Axis::base_only : Axis::total_space);
  }
  auto terms = parse_terms(trimmed);
  if (base_only) {
    for (const auto& t : terms) {
      if (!term_is_base_only(t)) {
        throw ConfigError("psi must be base-only; term '" + t.name + "' depends on tau1");
      }
    }
  }
  ScalarField f = make_field(
      grid,
      [&](double t1, double t2) {
        double acc = 0.0;
        for (const auto& t : terms) acc += t.coef * eval_term(t, t1, t2);
        return acc;
      },
      base_only ? Axis::base_only : Axis::total_space);
  return f;
}

FibrationGeometry geometry_from_config(const ExperimentConfig& cfg, GridPtr grid) {
  ScalarField phi = parse_perturbation(grid, cfg.phi, false);
  ScalarField psi = parse_perturbation(grid, cfg.psi, true);
  if (cfg.provider == "product") return make_product_geometry(grid, phi, psi, cfg.kappa);
  if (cfg.provider == "hirzebruch") return make_hirzebruch_geometry(grid, cfg.a, cfg.b, phi, psi);
  throw ConfigError("unknown provider '" + cfg.provider + "'");
}

// ---------------------------------------------------------------------------
// config parsing

namespace {

std::vector<double> parse_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    piece = trim(piece);
    if (piece.empty()) continue;
    size_t used = 0;
    out.push_back(std::stod(piece, &used));
    if (used != piece.size()) throw ConfigError("bad list entry '" + piece + "'");
  }
  if (out.empty()) throw ConfigError("empty list value '" + v + "'");
  return out;
}

double parse_num(const std::string& v) {
  size_t used = 0;
  const double x = std::stod(v, &used);
  if (used != v.size()) throw ConfigError("bad numeric value '" + v + "'");
  return x;
}

int parse_int(const std::string& v) {
  size_t used = 0;
  const int x = std::stoi(v, &used);
  if (used != v.size()) throw ConfigError("bad integer value '" + v + "'");
  return x;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("bad boolean value '" + v + "'");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    }
    try {
      if (key == "experiment") cfg.experiment = val;
      else if (key == "provider") cfg.provider = val;
      else if (key == "a") cfg.a = parse_int(val);
      else if (key == "b") cfg.b = parse_num(val);
      else if (key == "kappa") cfg.kappa = parse_num(val);
      else if (key == "grid") cfg.n1 = cfg.n2 = parse_int(val);
      else if (key == "n1") cfg.n1 = parse_int(val);
      else if (key == "n2") cfg.n2 = parse_int(val);
      else if (key == "phi") cfg.phi = val;
      else if (key == "psi") cfg.psi = val;
      else if (key == "k_list") cfg.k_list = parse_list(val);
      else if (key == "eps_list") cfg.eps_list = parse_list(val);
      else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(val));
      else if (key == "tol") cfg.tol = parse_num(val);
      else if (key == "dt") cfg.dt = parse_num(val);
      else if (key == "max_steps") cfg.max_steps = parse_int(val);
      else if (key == "num_geometries") cfg.num_geometries = parse_int(val);
      else if (key == "num_potentials") cfg.num_potentials = parse_int(val);
      else if (key == "quiet") cfg.quiet = parse_bool(val);
      else throw ConfigError("unknown key '" + key + "'");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// ---------------------------------------------------------------------------
// deterministic perturbation sampling

PerturbationSampler::PerturbationSampler(std::uint64_t seed) : state(seed ? seed : 0x9e3779b9ull) {}

double PerturbationSampler::uniform() {
  // splitmix64; platform-independent
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z = z ^ (z >> 31);
  const double u = static_cast<double>(z >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

namespace {

ScalarField cheb_sum_field(GridPtr grid, const std::vector<std::array<double, 3>>& terms,
                           Axis axis) {
  return make_field(
      grid,
      [&](double t1, double t2) {
        double acc = 0.0;
        for (const auto& t : terms) {
          acc += t[2] * cheb_t(static_cast<int>(t[0]), 2.0 * t1 - 1.0) *
                 cheb_t(static_cast<int>(t[1]), 2.0 * t2 - 1.0);
        }
        return acc;
      },
      axis);
}

}  // namespace

ScalarField PerturbationSampler::random_phi(GridPtr grid, double amplitude) {
  std::vector<std::array<double, 3>> terms;
  for (int i = 0; i <= 3; ++i) {
    for (int j = 0; j <= 3; ++j) {
      if (i == 0 && j == 0) continue;
      const double decay = 1.0 / ((1.0 + i) * (1.0 + j));
      terms.push_back({double(i), double(j), amplitude * decay * uniform()});
    }
  }
  return cheb_sum_field(grid, terms, Axis::total_space);
}

ScalarField PerturbationSampler::random_psi(GridPtr grid, double amplitude) {
  std::vector<std::array<double, 3>> terms;
  for (int j = 1; j <= 3; ++j) {
    terms.push_back({0.0, double(j), amplitude * uniform() / (1.0 + j)});
  }
  ScalarField f = cheb_sum_field(grid, terms, Axis::base_only);
  return f;
}

ScalarField PerturbationSampler::random_transverse(GridPtr grid, double amplitude) {
  return random_psi(grid, amplitude);
}

// ---------------------------------------------------------------------------
// shared experiment helpers

namespace {

constexpr const char* k_prod_phi = "0.08*sin2d + 0.04*cheb:2:1";
constexpr const char* k_prod_psi = "0.06*siny";
constexpr const char* k_hirz_phi = "0.06*sin2d + 0.03*cheb:1:2";
constexpr const char* k_hirz_psi = "0.05*siny";

double effective_tol(const ExperimentConfig& cfg, double def) {
  return cfg.tol.value_or(def);
}

ordered_json config_echo(const ExperimentConfig& cfg, double tol_used) {
  ordered_json j;
  j["experiment"] = cfg.experiment;
  j["provider"] = cfg.provider;
  j["a"] = cfg.a;
  j["b"] = cfg.b;
  j["kappa"] = cfg.kappa;
  j["n1"] = cfg.n1;
  j["n2"] = cfg.n2;
  j["phi"] = cfg.phi;
  j["psi"] = cfg.psi;
  j["k_list"] = cfg.k_list;
  j["eps_list"] = cfg.eps_list;
  j["seed"] = cfg.seed;
  j["tol"] = tol_used;
  j["dt"] = cfg.dt;
  j["max_steps"] = cfg.max_steps;
  j["num_geometries"] = cfg.num_geometries;
  j["num_potentials"] = cfg.num_potentials;
  return j;
}

struct NamedGeometry {
  std::string name;
  FibrationGeometry g;
};

std::vector<NamedGeometry> canonical_geometries(GridPtr grid) {
  std::vector<NamedGeometry> v;
  ScalarField zero = make_constant(grid, 0.0);
  ScalarField zero_b = make_constant(grid, 0.0, Axis::base_only);
  v.push_back({"round_product", make_product_geometry(grid, zero, zero_b, 1.0)});
  v.push_back({"product_perturbed",
               make_product_geometry(grid, parse_perturbation(grid, k_prod_phi, false),
                                     parse_perturbation(grid, k_prod_psi, true), 1.0)});
  v.push_back({"hirzebruch_reference", make_hirzebruch_geometry(grid, 1, 2.0, zero, zero_b)});
  v.push_back({"hirzebruch_perturbed",
               make_hirzebruch_geometry(grid, 1, 2.0, parse_perturbation(grid, k_hirz_phi, false),
                                        parse_perturbation(grid, k_hirz_psi, true))});
  return v;
}

bool decays_or_floored(const std::vector<double>& defects, double ratio, double floor) {
  for (size_t i = 1; i < defects.size(); ++i) {
    if (defects[i] <= floor) continue;
    if (defects[i] > defects[i - 1] / ratio) return false;
  }
  return true;
}

std::string to_s(double x) { return format_double(x); }

// ---------------------------------------------------------------------------
// round-baseline

ExperimentReport exp_round_baseline(const ExperimentConfig& cfg) {
  const double tol = effective_tol(cfg, 1e-8);
  GridPtr grid = make_grid(cfg.n1, cfg.n2);
  ScalarField zero = make_constant(grid, 0.0);
  ScalarField zero_b = make_constant(grid, 0.0, Axis::base_only);
  FibrationGeometry g = make_product_geometry(grid, zero, zero_b, 1.0);

  CurvatureBundle bun = curvature_bundle(g);
  RefRecord ref = closed_form_reference("round_product");

  std::vector<std::pair<std::string, double>> metrics;
  metrics.emplace_back("max|S_F - 2|", max_abs(bun.S_F - ref.values.at("S_F")));
  metrics.emplace_back("max|S_beta - 2|", max_abs(bun.S_beta - ref.values.at("S_beta")));
  metrics.emplace_back("|lambda - 2|", std::abs(bun.lambda - ref.values.at("lambda")));
  metrics.emplace_back("|S_pi - 2|", std::abs(bun.S_hat_pi - ref.values.at("S_pi")));
  metrics.emplace_back("|S_hat_F - 2|", std::abs(bun.S_hat_F - ref.values.at("S_hat_F")));
  double alpha_max = 0.0;
  for (double x : bun.alpha_pi.c22) alpha_max = std::max(alpha_max, std::abs(x));
  metrics.emplace_back("max|alpha_pi|", alpha_max);
  for (auto gen : {std::array<int, 2>{1, 0}, std::array<int, 2>{0, 1}}) {
    const std::string tag = "(" + std::to_string(gen[0]) + "," + std::to_string(gen[1]) + ")";
    metrics.emplace_back("|Fut_transverse" + tag + "|", std::abs(transverse_futaki(g, gen)));
    metrics.emplace_back("|Fut_submersion" + tag + "|", std::abs(submersion_futaki(g, gen)));
    metrics.emplace_back("|Fut_pairing" + tag + "|", std::abs(moment_pairing(g, gen)));
    metrics.emplace_back("|Fut_k=8" + tag + "|", std::abs(classical_futaki(g, gen, 8.0)));
  }
  const double s_k_dev = std::abs(average_total_scalar(g, 8.0) - (2.0 + 2.0 / 8.0));
  metrics.emplace_back("|S_hat_8 - 2.25|", s_k_dev);

  bool pass = true;
  std::vector<std::vector<std::string>> rows;
  ordered_json jm;
  for (auto& [name, val] : metrics) {
    const bool ok = val <= tol;
    pass = pass && ok;
    rows.push_back({name, to_s(val), to_s(tol), ok ? "pass" : "fail"});
    jm[name] = val;
  }

  ExperimentReport rep;
  rep.experiment = "round-baseline";
  rep.pass = pass;
  rep.json["experiment"] = "round-baseline";
  rep.json["config"] = config_echo(cfg, tol);
  rep.json["metrics"] = jm;
  rep.json["verdicts"]["all_match_closed_form"] = pass;
  rep.json["pass"] = pass;
  rep.csv["metrics"] = build_csv({"metric", "value", "tolerance", "verdict"}, rows);
  return rep;
}

// ---------------------------------------------------------------------------
// compute: one-shot invariants for the configured geometry

ExperimentReport exp_compute(const ExperimentConfig& cfg) {
  const double tol = effective_tol(cfg, 1e-6);
  GridPtr grid = make_grid(cfg.n1, cfg.n2);
  FibrationGeometry g = geometry_from_config(cfg, grid);

  CurvatureBundle bun = curvature_bundle(g);
  auto [rf, rb] = residuals(g);

  ordered_json jm;
  jm["S_hat_F"] = bun.S_hat_F;
  jm["lambda"] = bun.lambda;
  jm["S_hat_pi"] = bun.S_hat_pi;
  jm["r_fibre"] = rf;
  jm["r_base"] = rb;
  jm["twisted_two_route_defect"] = twisted_base_consistency(g);
  jm["fibre_area_deviation"] = max_abs(fibre_area(g) - 1.0);
  for (double k : cfg.k_list) {
    jm["S_hat_k"][format_double(k)] = average_total_scalar(g, k);
  }

  std::vector<std::vector<std::string>> rows;
  double max_route_diff = 0.0;
  for (auto gen : {std::array<int, 2>{1, 0}, std::array<int, 2>{0, 1}}) {
    FutakiRecord rec = futaki_record(g, gen, cfg.k_list);
    const double d1 = std::abs(rec.transverse - rec.submersion);
    const double d2 = std::abs(rec.transverse - rec.pairing_62);
    const double d3 = std::abs(rec.submersion - rec.pairing_62);
    max_route_diff = std::max({max_route_diff, d1, d2, d3});
    std::string classical;
    for (size_t i = 0; i < rec.classical_k.size(); ++i) {
      if (i) classical += ";";
      classical += to_s(rec.classical_k[i].second);
    }
    rows.push_back({std::to_string(gen[0]), std::to_string(gen[1]), to_s(rec.transverse),
                    to_s(rec.submersion), to_s(rec.pairing_62), to_s(rec.leading), classical});
    const std::string tag = "(" + std::to_string(gen[0]) + "," + std::to_string(gen[1]) + ")";
    jm["futaki" + tag]["transverse"] = rec.transverse;
    jm["futaki" + tag]["submersion"] = rec.submersion;
    jm["futaki" + tag]["pairing_62"] = rec.pairing_62;
    jm["futaki" + tag]["leading"] = rec.leading;
  }
  jm["max_route_difference"] = max_route_diff;

  ExperimentReport rep;
  rep.experiment = "compute";
  rep.pass = max_route_diff <= tol;
  rep.json["experiment"] = "compute";
  rep.json["config"] = config_echo(cfg, tol);
  rep.json["geometry"] = geometry_fingerprint(g);
  rep.json["metrics"] = jm;
  rep.json["verdicts"]["routes_agree"] = rep.pass;
  rep.json["pass"] = rep.pass;
  rep.csv["invariants"] = build_csv(
      {"gen1", "gen2", "transverse", "submersion", "pairing_62", "leading", "classical_k"}, rows);
  return rep;
}

// ---------------------------------------------------------------------------
// futaki-routes: route equality + leading term on the canonical testbeds

ExperimentReport exp_futaki_routes(const ExperimentConfig& cfg) {
  const double tol = effective_tol(cfg, 1e-6);
  GridPtr grid = make_grid(cfg.n1, cfg.n2);
  auto geoms = canonical_geometries(grid);

  std::vector<std::vector<std::string>> rows;
  double max_diff = 0.0, max_leading = 0.0, max_value = 0.0;
  for (const auto& [name, g] : geoms) {
    for (auto gen : {std::array<int, 2>{1, 0}, std::array<int, 2>{0, 1}, std::array<int, 2>{1, 1}}) {
      const double ft = transverse_futaki(g, gen);
      const double fs = submersion_futaki(g, gen);
      const double fp = moment_pairing(g, gen);
      const double diff = std::max({std::abs(ft - fs), std::abs(ft - fp), std::abs(fs - fp)});
      const double lead = gen[1] != 0 ? leading_term(g, gen) : 0.0;
      max_diff = std::max(max_diff, diff);
      max_leading = std::max(max_leading, std::abs(lead));
      max_value = std::max(max_value, std::abs(ft));
      rows.push_back({name, std::to_string(gen[0]), std::to_string(gen[1]), to_s(ft), to_s(fs),
                      to_s(fp), to_s(diff), to_s(lead)});
    }
  }

  const bool nonzero_present = max_value > 1e-4;
  const bool pass = max_diff <= tol && max_leading <= tol && nonzero_present;

  ExperimentReport rep;
  rep.experiment = "futaki-routes";
  rep.pass = pass;
  rep.json["experiment"] = "futaki-routes";
  rep.json["config"] = config_echo(cfg, tol);
  rep.json["metrics"]["max_pairwise_route_difference"] = max_diff;
  rep.json["metrics"]["max_leading_term"] = max_leading;
  rep.json["metrics"]["max_invariant_magnitude"] = max_value;
  rep.json["verdicts"]["routes_agree"] = max_diff <= tol;
  rep.json["verdicts"]["leading_term_vanishes"] = max_leading <= tol;
  rep.json["verdicts"]["nonzero_values_present"] = nonzero_present;
  rep.json["pass"] = pass;
  rep.csv["routes"] = build_csv({"geometry", "gen1", "gen2", "transverse", "submersion",
                                 "pairing_62", "max_pairwise_diff", "leading"},
                                rows);
  return rep;
}

// ---------------------------------------------------------------------------
// invariance-sweep: beta-class invariance of the transverse Futaki invariant

ExperimentReport exp_invariance_sweep(const ExperimentConfig& cfg) {
  const double tol = effective_tol(cfg, 1e-6);
  std::vector<std::vector<std::string>> rows;
  double max_delta_final = 0.0, max_fd = 0.0;

  const std::vector<int> sizes = {cfg.n1 / 2, (3 * cfg.n1) / 4, cfg.n1};
  std::vector<double> max_delta_by_size(sizes.size(), 0.0);

  for (size_t si = 0; si < sizes.size(); ++si) {
    const int n = sizes[si];
    GridPtr grid = make_grid(n, n);
    PerturbationSampler sampler(cfg.seed);
    for (int gi = 0; gi < cfg.num_geometries; ++gi) {
      ScalarField phi_g = sampler.random_phi(grid, 0.05);
      ScalarField psi_g = sampler.random_psi(grid, 0.05);
      FibrationGeometry g =
          (gi % 2 == 0) ? make_product_geometry(grid, phi_g, psi_g, 1.0)
                        : make_hirzebruch_geometry(grid, 1, 2.0, phi_g, psi_g);
      for (int pi = 0; pi < cfg.num_potentials; ++pi) {
        ScalarField pot = sampler.random_transverse(grid, 1.0);
        for (auto gen : {std::array<int, 2>{1, 0}, std::array<int, 2>{0, 1}}) {
          const double fut0 = transverse_futaki(g, gen);
          for (double eps : cfg.eps_list) {
            FibrationGeometry gs = shift(g, 0.0, pot, eps, pot);
            const double fut_eps = transverse_futaki(gs, gen);
            const double delta = std::abs(fut_eps - fut0);
            max_delta_by_size[si] = std::max(max_delta_by_size[si], delta);
            if (si + 1 == sizes.size()) {
              rows.push_back({std::to_string(gi), std::to_string(pi), std::to_string(gen[0]),
                              std::to_string(gen[1]), to_s(eps), to_s(fut0), to_s(fut_eps),
                              to_s(delta)});
            }
          }
          if (si + 1 == sizes.size()) {
            ScalarField zero = make_constant(grid, 0.0);
            const double fd = fd_directional_derivative(
                [&](const FibrationGeometry& gg) { return transverse_futaki(gg, gen); }, g, zero,
                pot, 1e-3);
            max_fd = std::max(max_fd, std::abs(fd));
          }
        }
      }
    }
  }
  max_delta_final = max_delta_by_size.back();
  const bool decay_ok = decays_or_floored(max_delta_by_size, 2.0, 1e-9);
  const bool pass = max_delta_final <= tol && max_fd <= tol && decay_ok;

  ExperimentReport rep;
  rep.experiment = "invariance-sweep";
  rep.pass = pass;
  rep.json["experiment"] = "invariance-sweep";
  rep.json["config"] = config_echo(cfg, tol);
  rep.json["metrics"]["max_delta"] = max_delta_final;
  rep.json["metrics"]["max_fd_derivative"] = max_fd;
  for (size_t si = 0; si < sizes.size(); ++si) {
    rep.json["metrics"]["max_delta_by_size"][std::to_string(sizes[si])] = max_delta_by_size[si];
  }
  rep.json["verdicts"]["invariance_holds"] = max_delta_final <= tol;
  rep.json["verdicts"]["fd_derivative_vanishes"] = max_fd <= tol;
  rep.json["verdicts"]["refinement_decay"] = decay_ok;
  rep.json["pass"] = pass;
  rep.csv["sweep"] = build_csv(
      {"geometry", "potential", "gen1", "gen2", "eps", "fut_base", "fut_shifted", "abs_delta"},
      rows);
  return rep;
}

// ---------------------------------------------------------------------------
// adiabatic-sweep: Fut_k/(2k) -> Fut_transverse and S_hat_k -> S_hat_F + lambda/k

ExperimentReport exp_adiabatic_sweep(const ExperimentConfig& cfg) {
  const double tol = effective_tol(cfg, 0.9);  // required decay order
  GridPtr grid = make_grid(cfg.n1, cfg.n2);
  FibrationGeometry g = geometry_from_config(cfg, grid);
  Averages a = averages(g);

  std::vector<std::vector<std::string>> fut_rows, avg_rows;
  std::vector<std::pair<double, double>> avg_pts;
  double fut_order_min = std::numeric_limits<double>::infinity();
  bool fut_floored = true;
  for (auto gen : {std::array<int, 2>{1, 0}, std::array<int, 2>{0, 1}}) {
    AdiabaticTable table = adiabatic_table(g, gen, cfg.k_list);
    for (const auto& row : table.rows) {
      fut_rows.push_back({std::to_string(gen[0]), std::to_string(gen[1]), to_s(row.k),
                          to_s(row.fut_k_scaled), to_s(row.fut_transverse), to_s(row.difference)});
      if (row.difference > 1e-10) fut_floored = false;
    }
    fut_order_min = std::min(fut_order_min, table.fitted_order);
  }
  for (double k : cfg.k_list) {
    const double lhs = k * (average_total_scalar(g, k) - a.S_hat_F);
    const double diff = std::abs(lhs - a.lambda);
    avg_rows.push_back({to_s(k), to_s(lhs), to_s(a.lambda), to_s(diff)});
    avg_pts.emplace_back(k, diff);
  }
  const double avg_order = richardson_order(avg_pts);
  bool avg_floored = true;
  for (auto& [k, d] : avg_pts) {
    (void)k;
    if (d > 1e-10) avg_floored = false;
  }

  const bool fut_ok = fut_floored || fut_order_min >= tol;
  const bool avg_ok = avg_floored || avg_order >= tol;
  const bool pass = fut_ok && avg_ok;

  ExperimentReport rep;
  rep.experiment = "adiabatic-sweep";
  rep.pass = pass;
  rep.json["experiment"] = "adiabatic-sweep";
  rep.json["config"] = config_echo(cfg, tol);
  rep.json["geometry"] = geometry_fingerprint(g);
  rep.json["metrics"]["futaki_fitted_order"] = fut_order_min;
  rep.json["metrics"]["average_fitted_order"] = avg_order;
  rep.json["metrics"]["lambda"] = a.lambda;
  rep.json["metrics"]["S_hat_F"] = a.S_hat_F;
  rep.json["verdicts"]["futaki_expansion_order"] = fut_ok;
  rep.json["verdicts"]["average_expansion_order"] = avg_ok;
  rep.json["pass"] = pass;
  rep.csv["futaki"] = build_csv(
      {"gen1", "gen2", "k", "fut_k_over_2k", "fut_transverse", "difference"}, fut_rows);
  rep.csv["average"] = build_csv({"k", "k_times_defect", "lambda", "difference"}, avg_rows);
  return rep;
}

// ---------------------------------------------------------------------------
// fine-expansion: sup-norm curvature expansion defect

ExperimentReport exp_fine_expansion(const ExperimentConfig& cfg) {
  const double tol = effective_tol(cfg, 0.9);
  GridPtr grid = make_grid(cfg.n1, cfg.n2);
  FibrationGeometry g = geometry_from_config(cfg, grid);

  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<double, double>> pts;
  for (double k : cfg.k_list) {
    const double d = fine_expansion_defect(g, k);
    rows.push_back({to_s(k), to_s(d)});
    pts.emplace_back(k, d);
  }
  const double order = richardson_order(pts);
  bool floored = true;
  for (auto& [k, d] : pts) {
    (void)k;
    if (d > 1e-10) floored = false;
  }
  const bool pass = floored || order >= tol;

  ExperimentReport rep;
  rep.experiment = "fine-expansion";
  rep.pass = pass;
  rep.json["experiment"] = "fine-expansion";
  rep.json["config"] = config_echo(cfg, tol);
  rep.json["geometry"] = geometry_fingerprint(g);
  rep.json["metrics"]["fitted_order"] = order;
  rep.json["verdicts"]["expansion_order"] = pass;
  rep.json["pass"] = pass;
  rep.csv["defects"] = build_csv({"k", "sup_defect"}, rows);
  return rep;
}

// ---------------------------------------------------------------------------
// identity-suite

struct IdentityCheck {
  std::string name;
  std::vector<double> defects;  // one per grid size
};

std::vector<IdentityCheck> run_identity_checks(const ExperimentConfig& cfg,
                                               const std::vector<int>& sizes) {
  std::vector<IdentityCheck> checks = {
      {"prop54_transverse_adjoint", {}}, {"prop54_fibre_adjoint", {}},
      {"lemma52_laplacian_density", {}}, {"lemma55_potential_shift", {}},
      {"prop513_linearization_fd", {}},  {"eq59_volume_derivative_fd", {}},
      {"prop515_integral_identity", {}}, {"lich_kernel_constant", {}},
      {"lich_kernel_moment", {}},        {"lich_self_adjoint", {}},
      {"lemma59_leading_term", {}},      {"twisted_two_route", {}},
  };

  for (int n : sizes) {
    GridPtr grid = make_grid(n, n);
    ExperimentConfig c = cfg;
    c.n1 = c.n2 = n;
    FibrationGeometry g = geometry_from_config(c, grid);

    ScalarField f_b = make_base_field(grid, [](double t) { return t * t * (1.0 - t); });
    ScalarField g_b = make_base_field(grid, [](double t) { return std::sin(std::numbers::pi * t); });
    ScalarField f_f = make_fibre_field(grid, [](double t) { return t * t * (1.0 - t); });
    ScalarField g_f = make_fibre_field(grid, [](double t) { return std::sin(std::numbers::pi * t); });
    ScalarField phi = make_base_field(
        grid, [](double t) { return 0.15 * cheb_t(2, 2.0 * t - 1.0) + 0.1 * t * t * t; });

    int ci = 0;
    // Prop 5.4: Int g Delta_beta f + 1/2 Int <df, dg>_beta = 0
    {
      const double lhs = integrate_global(g_b * laplacian(f_b, LaplaceKind::transverse, g), g.W, g.B);
      const double rhs = -0.5 * integrate_global(grad_pairing_beta(g, f_b, g_b), g.W, g.B);
      checks[ci++].defects.push_back(std::abs(lhs - rhs));
    }
    {
      const double lhs = integrate_global(g_f * laplacian(f_f, LaplaceKind::leafwise, g), g.W, g.B);
      const double rhs = -0.5 * integrate_global(grad_pairing_fibre(g, f_f, g_f), g.W, g.B);
      checks[ci++].defects.push_back(std::abs(lhs - rhs));
    }
    // Lemma 5.2: Delta_beta f * (omega^beta density) = (i ddbar f)^omega density
    {
      ScalarField lap = laplacian(f_b, LaplaceKind::transverse, g);
      ScalarField lhs = lap * wedge_density(g.W, g.B);
      ScalarField rhs = wedge_density(hessian_form(g, f_b), g.W);
      checks[ci++].defects.push_back(max_abs(lhs - rhs));
    }
    // Lemma 5.5: h(beta + i ddbar phi) = h(beta) + v(phi) up to a constant
    {
      FibrationGeometry gs = shift(g, 0.0, phi, 1.0, phi);
      TorusField t0 = potentials({0, 1}, g);
      TorusField t1 = potentials({0, 1}, gs);
      ScalarField expected = t0.h + cyl_d2(g, phi);
      ScalarField delta = t1.h - expected;
      const double mean = global_average(delta, g.W, g.B);
      checks[ci++].defects.push_back(max_abs(delta - mean));
    }
    // Prop 5.13: linearization vs central finite difference of the twisted map
    {
      const double step = 1e-4;
      FibrationGeometry gp = shift(g, 0.0, phi, step, phi);
      FibrationGeometry gm = shift(g, 0.0, phi, -step, phi);
      ScalarField tw_p = twisted_base_scalar(gp);
      ScalarField tw_m = twisted_base_scalar(gm);
      ScalarField fd = (1.0 / (2.0 * step)) * (tw_p - tw_m);
      checks[ci++].defects.push_back(max_abs(fd - linearized_twisted(g, phi)));
    }
    // Eq 5.9: d/dt (omega ^ beta_t) = Delta_beta phi (omega ^ beta)
    {
      const double step = 1e-4;
      FibrationGeometry gp = shift(g, 0.0, phi, step, phi);
      FibrationGeometry gm = shift(g, 0.0, phi, -step, phi);
      ScalarField fd = (1.0 / (2.0 * step)) * (wedge_density(gp.W, gp.B) - wedge_density(gm.W, gm.B));
      ScalarField expected = laplacian(phi, LaplaceKind::transverse, g) * wedge_density(g.W, g.B);
      checks[ci++].defects.push_back(max_abs(fd - expected));
    }
    // Prop 5.15: Int P(phi) h omega^beta + mixed pairing = 0
    {
      double worst = 0.0;
      ScalarField p_phi = operator_P(g, phi);
      for (auto gen : {std::array<int, 2>{0, 1}, std::array<int, 2>{1, 1}}) {
        TorusField t = potentials(gen, g);
        const double lhs = integrate_global(p_phi * t.h, g.W, g.B);
        const double rhs = mixed_pairing(g, gen, phi);
        worst = std::max(worst, std::abs(lhs + rhs));
      }
      checks[ci++].defects.push_back(worst);
    }
    // Lichnerowicz kernel: constants and the beta-moment coordinate
    {
      ScalarField one = make_constant(grid, 1.0, Axis::base_only);
      checks[ci++].defects.push_back(max_abs(lichnerowicz_transverse(g, one)));
      ScalarField mu = base_moment(g);
      checks[ci++].defects.push_back(max_abs(lichnerowicz_transverse(g, mu)));
    }
    // Self-adjointness of L_beta
    {
      const double ab = integrate_global(f_b * lichnerowicz_transverse(g, g_b), g.W, g.B);
      const double ba = integrate_global(g_b * lichnerowicz_transverse(g, f_b), g.W, g.B);
      checks[ci++].defects.push_back(std::abs(ab - ba));
    }
    // Lemma 5.9 leading term
    {
      double worst = 0.0;
      for (auto gen : {std::array<int, 2>{0, 1}, std::array<int, 2>{1, 1}}) {
        worst = std::max(worst, std::abs(leading_term(g, gen)));
      }
      checks[ci++].defects.push_back(worst);
    }
    // Twisted scalar two-route agreement
    checks[ci++].defects.push_back(twisted_base_consistency(g));
  }
  return checks;
}

ExperimentReport exp_identity_suite(const ExperimentConfig& cfg) {
  const double tol = effective_tol(cfg, 1e-6);
  std::vector<int> sizes = {cfg.n1 / 4, cfg.n1 / 2, cfg.n1};
  for (int& s : sizes) s = std::max(s, 8);

  auto checks = run_identity_checks(cfg, sizes);

  std::vector<std::vector<std::string>> rows;
  bool final_ok = true, decay_ok = true;
  ordered_json jm;
  for (const auto& chk : checks) {
    for (size_t si = 0; si < sizes.size(); ++si) {
      rows.push_back({chk.name, std::to_string(sizes[si]), to_s(chk.defects[si])});
    }
    const double final_defect = chk.defects.back();
    final_ok = final_ok && final_defect <= tol;
    decay_ok = decay_ok && decays_or_floored(chk.defects, 4.0, 1e-11);
    jm[chk.name] = final_defect;
  }
  const bool pass = final_ok && decay_ok;

  ExperimentReport rep;
  rep.experiment = "identity-suite";
  rep.pass = pass;
  rep.json["experiment"] = "identity-suite";
  rep.json["config"] = config_echo(cfg, tol);
  rep.json["metrics"] = jm;
  rep.json["verdicts"]["identities_hold"] = final_ok;
  rep.json["verdicts"]["spectral_decay"] = decay_ok;
  rep.json["pass"] = pass;
  rep.csv["defects"] = build_csv({"check", "n", "defect"}, rows);
  return rep;
}

// ---------------------------------------------------------------------------
// oracle-consistency

ExperimentReport exp_oracle_consistency(const ExperimentConfig& cfg) {
  const double rel_tol = 1e-4;
  const double zero_tol = effective_tol(cfg, 1e-8);
  GridPtr grid = make_grid(cfg.n1, cfg.n2);
  ScalarField zero = make_constant(grid, 0.0);
  ScalarField zero_b = make_constant(grid, 0.0, Axis::base_only);

  FibrationGeometry hirz_ref = make_hirzebruch_geometry(grid, 1, 2.0, zero, zero_b);
  FibrationGeometry hirz_pert =
      make_hirzebruch_geometry(grid, 1, 2.0, parse_perturbation(grid, k_hirz_phi, false),
                               parse_perturbation(grid, k_hirz_psi, true));
  FibrationGeometry prod_round = make_product_geometry(grid, zero, zero_b, 1.0);
  FibrationGeometry prod_pert =
      make_product_geometry(grid, parse_perturbation(grid, k_prod_phi, false),
                            parse_perturbation(grid, k_prod_psi, true), 1.0);

  // one-time calibration, then frozen
  const double C0 = calibrate_toric_constant(hirz_ref, {1, 0}, 8);

  std::vector<std::vector<std::string>> rows;
  double max_rel = 0.0, max_prod = 0.0;
  auto check_case = [&](const std::string& name, const FibrationGeometry& g,
                        std::array<int, 2> gen, long long k) {
    PolytopeData p = moment_polytope(g, k);
    validate_polytope(p);
    AffineFn f = generator_affine(p, gen);
    const double oracle = toric_futaki_oracle(p, f, C0);
    const double classical = classical_futaki(g, gen, static_cast<double>(k));
    double rel = 0.0;
    if (std::abs(oracle) > 1e-12) {
      rel = std::abs(classical - oracle) / std::abs(oracle);
      max_rel = std::max(max_rel, rel);
    } else {
      max_prod = std::max(max_prod, std::abs(classical));
    }
    rows.push_back({name, std::to_string(gen[0]), std::to_string(gen[1]), std::to_string(k),
                    to_s(classical), to_s(oracle), to_s(rel)});
  };

  check_case("hirzebruch_reference", hirz_ref, {1, 0}, 8);   // calibration datum
  check_case("hirzebruch_reference", hirz_ref, {1, 0}, 16);  // held-out k
  check_case("hirzebruch_reference", hirz_ref, {1, 0}, 32);
  check_case("hirzebruch_reference", hirz_ref, {0, 1}, 16);  // held-out field
  check_case("hirzebruch_perturbed", hirz_pert, {1, 0}, 16); // class invariance
  check_case("hirzebruch_perturbed", hirz_pert, {0, 1}, 16);
  check_case("product_round", prod_round, {1, 0}, 8);
  check_case("product_round", prod_round, {0, 1}, 8);
  check_case("product_perturbed", prod_pert, {1, 0}, 8);
  check_case("product_perturbed", prod_pert, {0, 1}, 8);
  check_case("product_perturbed", prod_pert, {1, 0}, 16);

  const double c0_dev = std::abs(C0 / angular_factor - 1.0);
  const bool pass = max_rel <= rel_tol && max_prod <= zero_tol;

  ExperimentReport rep;
  rep.experiment = "oracle-consistency";
  rep.pass = pass;
  rep.json["experiment"] = "oracle-consistency";
  rep.json["config"] = config_echo(cfg, zero_tol);
  rep.json["metrics"]["C0"] = C0;
  rep.json["metrics"]["C0_over_4pi2_minus_1"] = c0_dev;
  rep.json["metrics"]["max_relative_error"] = max_rel;
  rep.json["metrics"]["max_product_classical"] = max_prod;
  rep.json["verdicts"]["heldout_predictions"] = max_rel <= rel_tol;
  rep.json["verdicts"]["product_zeros"] = max_prod <= zero_tol;
  rep.json["pass"] = pass;
  rep.csv["cases"] = build_csv(
      {"case", "gen1", "gen2", "k", "classical_futaki", "toric_oracle", "rel_error"}, rows);
  return rep;
}

// ---------------------------------------------------------------------------
// solve

ExperimentReport exp_solve(const ExperimentConfig& cfg) {
  const double tol = effective_tol(cfg, 1e-6);
  GridPtr grid = make_grid(cfg.n1, cfg.n2);
  FibrationGeometry g = geometry_from_config(cfg, grid);

  FlowOptions opts;
  opts.dt = cfg.dt;
  opts.max_steps = cfg.max_steps;
  opts.tol = tol;
  FlowResult res = solve(g, opts);

  std::vector<std::vector<std::string>> rows;
  for (const auto& p : res.trace) {
    rows.push_back({std::to_string(p.step), to_s(p.t), to_s(p.dt), to_s(p.r_fibre), to_s(p.r_base),
                    to_s(p.energy)});
  }

  double fut_max = 0.0;
  for (auto gen : {std::array<int, 2>{1, 0}, std::array<int, 2>{0, 1}}) {
    fut_max = std::max(fut_max, std::abs(transverse_futaki(res.g, gen)));
  }
  double round_dev = 0.0;
  if (res.g.provider == Provider::product_p1xp1) {
    const auto& gr = *res.g.grid;
    for (int i = 0; i < gr.n1; ++i) {
      const double w = gr.nodes1[i] * (1.0 - gr.nodes1[i]);
      for (int j = 0; j < gr.n2; ++j) {
        round_dev = std::max(round_dev, std::abs(res.g.W.c11[gr.idx(i, j)] - w));
      }
    }
  }
  auto [rf, rb] = residuals(res.g);

  const bool pass = res.converged;

  ExperimentReport rep;
  rep.experiment = "solve";
  rep.pass = pass;
  rep.json["experiment"] = "solve";
  rep.json["config"] = config_echo(cfg, tol);
  rep.json["geometry"] = geometry_fingerprint(g);
  rep.json["metrics"]["converged"] = res.converged;
  rep.json["metrics"]["steps"] = res.steps;
  rep.json["metrics"]["final_r_fibre"] = rf;
  rep.json["metrics"]["final_r_base"] = rb;
  rep.json["metrics"]["final_futaki_max"] = fut_max;
  rep.json["metrics"]["fibre_metric_round_deviation"] = round_dev;
  rep.json["metrics"]["monotone_after_transient"] = res.monotone_after_transient;
  if (!res.message.empty()) rep.json["metrics"]["message"] = res.message;
  rep.json["verdicts"]["converged"] = res.converged;
  rep.json["pass"] = pass;
  rep.csv["trace"] = build_csv({"step", "t", "dt", "r_fibre", "r_base", "energy"}, rows);
  return rep;
}

// ---------------------------------------------------------------------------
// verify-all

ExperimentReport exp_verify_all(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.experiment = "verify-all";
  rep.json["experiment"] = "verify-all";
  rep.json["config"] = config_echo(cfg, cfg.tol.value_or(1e-6));

  bool pass = true;
  auto add = [&](const ExperimentConfig& sub) {
    ExperimentReport r = run_experiment(sub);
    pass = pass && r.pass;
    rep.json["sub"][r.experiment]["pass"] = r.pass;
    rep.json["sub"][r.experiment]["verdicts"] = r.json["verdicts"];
    rep.json["sub"][r.experiment]["metrics"] = r.json["metrics"];
    for (const auto& [name, body] : r.csv) rep.csv[r.experiment + "__" + name] = body;
  };

  {
    ExperimentConfig c = cfg;
    c.experiment = "round-baseline";
    c.n1 = c.n2 = 48;
    c.tol.reset();
    add(c);
  }
  {
    ExperimentConfig c = cfg;
    c.experiment = "identity-suite";
    c.provider = "product";
    c.phi = k_prod_phi;
    c.psi = k_prod_psi;
    c.kappa = 1.0;
    c.n1 = c.n2 = 64;
    c.tol.reset();
    add(c);
  }
  {
    ExperimentConfig c = cfg;
    c.experiment = "futaki-routes";
    c.n1 = c.n2 = 64;
    c.tol.reset();
    add(c);
  }
  {
    ExperimentConfig c = cfg;
    c.experiment = "invariance-sweep";
    c.n1 = c.n2 = 64;
    c.tol.reset();
    add(c);
  }
  {
    ExperimentConfig c = cfg;
    c.experiment = "adiabatic-sweep";
    c.provider = "hirzebruch";
    c.a = 1;
    c.b = 2.0;
    c.phi = k_hirz_phi;
    c.psi = k_hirz_psi;
    c.n1 = c.n2 = 48;
    c.k_list = {8, 16, 32};
    c.tol.reset();
    add(c);
  }
  {
    ExperimentConfig c = cfg;
    c.experiment = "fine-expansion";
    c.provider = "product";
    c.phi = k_prod_phi;
    c.psi = k_prod_psi;
    c.n1 = c.n2 = 48;
    c.k_list = {8, 16, 32, 64};
    c.tol.reset();
    add(c);
  }
  {
    ExperimentConfig c = cfg;
    c.experiment = "oracle-consistency";
    c.n1 = c.n2 = 48;
    c.tol.reset();
    add(c);
  }
  {
    ExperimentConfig c = cfg;
    c.experiment = "solve";
    c.provider = "product";
    c.phi = "0.1*sin2d";
    c.psi = "";
    c.kappa = 1.0;
    c.n1 = c.n2 = 48;
    c.dt = 0.5;
    c.max_steps = 10000;
    c.tol.reset();
    add(c);
  }

  rep.pass = pass;
  rep.json["pass"] = pass;
  return rep;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  const std::string& e = cfg.experiment;
  if (e == "round-baseline") return exp_round_baseline(cfg);
  if (e == "compute") return exp_compute(cfg);
  if (e == "futaki-routes") return exp_futaki_routes(cfg);
  if (e == "invariance-sweep") return exp_invariance_sweep(cfg);
  if (e == "adiabatic-sweep") return exp_adiabatic_sweep(cfg);
  if (e == "fine-expansion") return exp_fine_expansion(cfg);
  if (e == "identity-suite") return exp_identity_suite(cfg);
  if (e == "oracle-consistency") return exp_oracle_consistency(cfg);
  if (e == "solve") return exp_solve(cfg);
  if (e == "verify-all") return exp_verify_all(cfg);
  throw ConfigError("unknown experiment '" + e + "'");
}

std::vector<std::string> write_report(const ExperimentReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> written;

  const fs::path json_path = fs::path(out_dir) / (report.experiment + ".json");
  {
    std::ofstream out(json_path, std::ios::binary);
    out << report.json.dump(2) << "\n";
  }
  written.push_back(json_path.string());

  for (const auto& [name, body] : report.csv) {
    const fs::path csv_path = fs::path(out_dir) / (report.experiment + "__" + name + ".csv");
    std::ofstream out(csv_path, std::ios::binary);
    out << body;
    written.push_back(csv_path.string());
  }
  return written;
}

}  // namespace fiblab
