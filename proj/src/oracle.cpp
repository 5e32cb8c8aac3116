#include "oracle.hpp"
#include "invariants.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fiblab {

namespace {

long long checked_ll(__int128 v, const char* who) {
  if (v > static_cast<__int128>(1) << 62 || v < -(static_cast<__int128>(1) << 62)) {
    throw std::overflow_error(std::string(who) + ": rational overflow");
  }
  return static_cast<long long>(v);
}

Rational make_rat(__int128 n, __int128 d) {
  if (d == 0) throw std::invalid_argument("Rational: zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  __int128 a = n < 0 ? -n : n, b = d;
  while (b) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  if (a == 0) a = 1;
  Rational r;
  r.num = checked_ll(n / a, "Rational");
  r.den = checked_ll(d / a, "Rational");
  return r;
}

}  // namespace

Rational::Rational(long long n, long long d) { *this = make_rat(n, d); }

Rational operator+(Rational a, Rational b) {
  return make_rat(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                  static_cast<__int128>(a.den) * b.den);
}
Rational operator-(Rational a, Rational b) { return a + (-b); }
Rational operator*(Rational a, Rational b) {
  return make_rat(static_cast<__int128>(a.num) * b.num, static_cast<__int128>(a.den) * b.den);
}
Rational operator/(Rational a, Rational b) {
  if (b.num == 0) throw std::invalid_argument("Rational: division by zero");
  return make_rat(static_cast<__int128>(a.num) * b.den, static_cast<__int128>(a.den) * b.num);
}
Rational operator-(Rational a) {
  Rational r = a;
  r.num = -r.num;
  return r;
}
bool operator<(Rational a, Rational b) {
  return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}

Rational rational_from_double(double x, long long max_den) {
  for (long long d = 1; d <= max_den; d *= 2) {
    const double scaled = x * static_cast<double>(d);
    const double rounded = std::round(scaled);
    if (scaled == rounded && std::abs(rounded) < 9e15) {
      return Rational(static_cast<long long>(rounded), d);
    }
  }
  throw std::invalid_argument("rational_from_double: not exactly representable");
}

PolytopeData polytope_rectangle(Rational height) { return polytope_trapezoid(0, height); }

PolytopeData polytope_trapezoid(int a, Rational c) {
  if (a < 0 || !(Rational(0) < c)) {
    throw std::invalid_argument("polytope_trapezoid: need a >= 0 and c > 0");
  }
  PolytopeData p;
  const Rational one(1), zero(0);
  p.vertices = {{zero, zero}, {one, zero}, {one, c + Rational(a)}, {zero, c}};
  // counterclockwise edges with primitive inner normals
  p.facets = {
      {0, 1, zero, 0, 1},   // bottom: y >= 0
      {-1, 0, one, 1, 2},   // right: 1 - x >= 0
      {a, -1, c, 2, 3},     // top: a x - y + c >= 0
      {1, 0, zero, 3, 0},   // left: x >= 0
  };
  validate_polytope(p);
  return p;
}

PolytopeData moment_polytope(const FibrationGeometry& g, long long k) {
  Rational scale = rational_from_double(g.base_scale);
  Rational c = Rational(k) * scale;
  if (g.provider == Provider::product_p1xp1) return polytope_rectangle(c);
  return polytope_trapezoid(g.twist, c);
}

void validate_polytope(const PolytopeData& p) {
  for (const auto& f : p.facets) {
    for (int vi : {f.v0, f.v1}) {
      Rational l = Rational(f.ux) * p.vertices[vi][0] + Rational(f.uy) * p.vertices[vi][1] + f.offset;
      if (!l.is_zero()) throw std::logic_error("polytope facet/vertex inconsistency");
    }
    const long long gcd = std::gcd(std::abs(f.ux), std::abs(f.uy));
    if (gcd != 1) throw std::logic_error("polytope facet normal not primitive");
    for (size_t vi = 0; vi < p.vertices.size(); ++vi) {
      Rational l = Rational(f.ux) * p.vertices[vi][0] + Rational(f.uy) * p.vertices[vi][1] + f.offset;
      if (l < Rational(0)) throw std::logic_error("polytope vertex outside facet halfplane");
    }
  }
}

Rational polytope_volume(const PolytopeData& p) {
  Rational acc(0);
  const size_t n = p.vertices.size();
  for (size_t i = 0; i < n; ++i) {
    const auto& a = p.vertices[i];
    const auto& b = p.vertices[(i + 1) % n];
    acc = acc + (a[0] * b[1] - b[0] * a[1]);
  }
  return acc / Rational(2);
}

Rational polytope_integral(const PolytopeData& p, const AffineFn& f) {
  // exact for affine f: Vol * f(centroid)
  const size_t n = p.vertices.size();
  Rational cx(0), cy(0), area2(0);
  for (size_t i = 0; i < n; ++i) {
    const auto& a = p.vertices[i];
    const auto& b = p.vertices[(i + 1) % n];
    Rational cross = a[0] * b[1] - b[0] * a[1];
    area2 = area2 + cross;
    cx = cx + (a[0] + b[0]) * cross;
    cy = cy + (a[1] + b[1]) * cross;
  }
  Rational vol = area2 / Rational(2);
  std::array<Rational, 2> centroid{cx / (Rational(3) * area2), cy / (Rational(3) * area2)};
  return vol * f.eval(centroid);
}

namespace {

Rational facet_sigma_length(const PolytopeData& p, const PolytopeData::Facet& f) {
  // dsigma normalized so the primitive inner normal pairs to Lebesgue:
  // sigma(edge) = |det[delta, u]| / <u, u>.
  Rational dx = p.vertices[f.v1][0] - p.vertices[f.v0][0];
  Rational dy = p.vertices[f.v1][1] - p.vertices[f.v0][1];
  Rational det = dx * Rational(f.uy) - dy * Rational(f.ux);
  if (det < Rational(0)) det = -det;
  return det / Rational(f.ux * f.ux + f.uy * f.uy);
}

}  // namespace

Rational boundary_measure(const PolytopeData& p) {
  Rational acc(0);
  for (const auto& f : p.facets) acc = acc + facet_sigma_length(p, f);
  return acc;
}

Rational boundary_integral(const PolytopeData& p, const AffineFn& f) {
  Rational acc(0);
  for (const auto& facet : p.facets) {
    Rational len = facet_sigma_length(p, facet);
    Rational avg = (f.eval(p.vertices[facet.v0]) + f.eval(p.vertices[facet.v1])) / Rational(2);
    acc = acc + len * avg;
  }
  return acc;
}

AffineFn generator_affine(const PolytopeData& p, std::array<int, 2> gen) {
  AffineFn f{Rational(gen[0]), Rational(gen[1]), Rational(0)};
  Rational avg = polytope_integral(p, f) / polytope_volume(p);
  f.f0 = -avg;
  return f;
}

Rational toric_boundary_combination(const PolytopeData& p, const AffineFn& f) {
  Rational bulk = polytope_integral(p, f);
  if (!bulk.is_zero()) {
    throw std::invalid_argument("toric_boundary_combination: f must have average zero on P");
  }
  Rational two(2);
  return two * boundary_integral(p, f) -
         (two * boundary_measure(p) / polytope_volume(p)) * bulk;
}

double toric_futaki_oracle(const PolytopeData& p, const AffineFn& f, double C0) {
  return C0 * toric_boundary_combination(p, f).to_double();
}

double calibrate_toric_constant(const FibrationGeometry& reference, std::array<int, 2> gen,
                                long long k) {
  PolytopeData p = moment_polytope(reference, k);
  AffineFn f = generator_affine(p, gen);
  const double combination = toric_boundary_combination(p, f).to_double();
  if (combination == 0.0) {
    throw std::invalid_argument("calibrate_toric_constant: calibration datum has zero invariant");
  }
  return classical_futaki(reference, gen, static_cast<double>(k)) / combination;
}

RefRecord closed_form_reference(const std::string& name) {
  RefRecord r;
  if (name == "round_product") {
    r.values = {{"S_F", 2.0},      {"S_beta", 2.0},  {"lambda", 2.0}, {"S_pi", 2.0},
                {"S_hat_F", 2.0},  {"alpha_pi", 0.0}, {"futaki", 0.0}};
    r.functions["S_omega_k"] = [](double k) { return 2.0 + 2.0 / k; };
    return r;
  }
  if (name == "fs_scalar") {
    r.values = {{"value", 2.0}};
    return r;
  }
  if (name == "fs_potential_hessian") {
    r.functions["value"] = [](double tau) { return tau * (1.0 - tau); };
    return r;
  }
  if (name == "fs_moment_laplacian") {
    r.functions["value"] = [](double tau) { return 1.0 - 2.0 * tau; };
    return r;
  }
  throw std::invalid_argument("closed_form_reference: unknown name '" + name + "'");
}

double fd_directional_derivative(const std::function<double(const FibrationGeometry&)>& functional,
                                 const FibrationGeometry& g, const ScalarField& dPhi,
                                 const ScalarField& dpsi, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_directional_derivative: step must be > 0");
  const double fp = functional(shift(g, step, dPhi, step, dpsi));
  const double fm = functional(shift(g, -step, dPhi, -step, dpsi));
  return (fp - fm) / (2.0 * step);
}

double richardson_order(const std::vector<std::pair<double, double>>& pts) {
  std::vector<std::pair<double, double>> logs;
  for (const auto& [x, y] : pts) {
    const double ay = std::abs(y);
    if (x > 0.0 && ay > 1e-300) logs.emplace_back(std::log(x), std::log(ay));
  }
  if (logs.size() < 2) return std::numeric_limits<double>::infinity();
  double mx = 0, my = 0;
  for (const auto& [lx, ly] : logs) {
    mx += lx;
    my += ly;
  }
  mx /= logs.size();
  my /= logs.size();
  double cov = 0, var = 0;
  for (const auto& [lx, ly] : logs) {
    cov += (lx - mx) * (ly - my);
    var += (lx - mx) * (lx - mx);
  }
  return -cov / var;  // decay order: |y| ~ C x^{-p}
}

}  // namespace fiblab
