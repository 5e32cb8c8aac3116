#pragma once

#include "geometry.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace fiblab {

/// Exact rational arithmetic for the toric oracle (small magnitudes only).
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n) : num(n), den(1) {}
  Rational(long long n, long long d);

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_zero() const { return num == 0; }

  friend Rational operator+(Rational a, Rational b);
  friend Rational operator-(Rational a, Rational b);
  friend Rational operator*(Rational a, Rational b);
  friend Rational operator/(Rational a, Rational b);
  friend Rational operator-(Rational a);
  friend bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
  friend bool operator<(Rational a, Rational b);
};

/// Reconstruct a rational with small denominator; throws if x is not exactly
/// representable with denominator <= max_den.
Rational rational_from_double(double x, long long max_den = 1 << 20);

/// Delzant polygon of the class [omega + k beta]: rectangle for the product,
/// trapezoid for the Hirzebruch provider. Facets store primitive integer
/// inner normals u with rational offsets c (facet = {<u,p> + c = 0}) plus the
/// indices of their two vertices in counterclockwise order.
struct PolytopeData {
  struct Facet {
    long long ux, uy;
    Rational offset;
    int v0, v1;
  };
  std::vector<std::array<Rational, 2>> vertices;  // counterclockwise
  std::vector<Facet> facets;
};

/// Rectangle [0,1] x [0,height].
PolytopeData polytope_rectangle(Rational height);
/// Trapezoid {0 <= x <= 1, 0 <= y <= c + a x}.
PolytopeData polytope_trapezoid(int a, Rational c);
/// Moment polytope of [omega + k beta] for the geometry's provider; the base
/// scale must be exactly rational-representable.
PolytopeData moment_polytope(const FibrationGeometry& g, long long k);

/// Exact consistency of vertices with facets; throws on violation.
void validate_polytope(const PolytopeData& p);

struct AffineFn {
  Rational fx, fy, f0;
  Rational eval(const std::array<Rational, 2>& p) const { return fx * p[0] + fy * p[1] + f0; }
};

Rational polytope_volume(const PolytopeData& p);
Rational polytope_integral(const PolytopeData& p, const AffineFn& f);   // Int_P f dmu
Rational boundary_measure(const PolytopeData& p);                        // Vol(dP, dsigma)
Rational boundary_integral(const PolytopeData& p, const AffineFn& f);    // Int_dP f dsigma

/// Affine moment function of a torus generator, normalized to average zero on P.
AffineFn generator_affine(const PolytopeData& p, std::array<int, 2> gen);

/// The metric-free boundary combination 2 Int_dP f dsigma - (2 Vol dP / Vol P) Int_P f dmu,
/// exact in rational arithmetic. Rejects f with nonzero average.
Rational toric_boundary_combination(const PolytopeData& p, const AffineFn& f);

/// C0 times the boundary combination.
double toric_futaki_oracle(const PolytopeData& p, const AffineFn& f, double C0);

/// One-time calibration of C0 against classical_futaki on a fixed reference
/// datum; the constant is then frozen for all (k, class, field).
double calibrate_toric_constant(const FibrationGeometry& reference, std::array<int, 2> gen,
                                long long k);

/// Closed-form values derivable from the Fubini-Study potential under the
/// project conventions.
struct RefRecord {
  std::map<std::string, double> values;
  std::map<std::string, std::function<double(double)>> functions;
};
RefRecord closed_form_reference(const std::string& name);

/// Central difference (F(g + step d) - F(g - step d)) / (2 step) along a
/// (dPhi, dpsi) direction.
double fd_directional_derivative(const std::function<double(const FibrationGeometry&)>& functional,
                                 const FibrationGeometry& g, const ScalarField& dPhi,
                                 const ScalarField& dpsi, double step);

/// Least-squares decay order p of |y| ~ C x^{-p} from (x, |y|) pairs.
double richardson_order(const std::vector<std::pair<double, double>>& pts);

}  // namespace fiblab
