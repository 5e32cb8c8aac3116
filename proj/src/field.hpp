#pragma once

#include "grid.hpp"

#include <functional>
#include <string>
#include <vector>

namespace fiblab {

/// Dependence tag for torus-invariant scalar data.
enum class Axis { total_space, base_only, fibre_profile };

/// Torus-invariant function on the total space, stored nodewise on the full
/// grid. base_only / fibre_profile fields are stored redundantly (constant
/// along the inert axis) so nodewise algebra never branches.
struct ScalarField {
  GridPtr grid;
  Axis axis = Axis::total_space;
  std::vector<double> v;

  double& at(int i, int j) { return v[grid->idx(i, j)]; }
  double at(int i, int j) const { return v[grid->idx(i, j)]; }
};

/// Torus-invariant real (1,1)-form: symmetric 2x2 component matrix per node
/// in the fixed cylinder coframe (ds1^dth1, ds1^dth2 + ds2^dth1, ds2^dth2).
struct TwoForm {
  GridPtr grid;
  bool from_potential = false;  // arose as a Hessian of a potential
  std::vector<double> c11, c12, c22;
};

ScalarField make_constant(GridPtr g, double value, Axis axis = Axis::total_space);
ScalarField make_field(GridPtr g, const std::function<double(double, double)>& f,
                       Axis axis = Axis::total_space);
/// base_only field from a function of tau2.
ScalarField make_base_field(GridPtr g, const std::function<double(double)>& f);
/// fibre_profile field from a function of tau1.
ScalarField make_fibre_field(GridPtr g, const std::function<double(double)>& f);

TwoForm make_zero_form(GridPtr g);

// Nodewise algebra. Fields must share a grid; the result axis is the weaker
// of the two tags (total_space unless both agree).
ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator/(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);
ScalarField operator+(const ScalarField& a, double s);
ScalarField operator-(const ScalarField& a, double s);

TwoForm operator+(const TwoForm& a, const TwoForm& b);
TwoForm operator-(const TwoForm& a, const TwoForm& b);
TwoForm operator*(double s, const TwoForm& a);

double max_abs(const ScalarField& f);
double max_abs_diff(const TwoForm& a, const TwoForm& b);

/// Nodal d/dtau along each axis.
ScalarField dtau1(const ScalarField& f);
ScalarField dtau2(const ScalarField& f);

/// Max |d/dtau1| of a field claimed base_only (should be ~0).
double base_only_defect(const ScalarField& f);

/// Extract the tau2 profile of a base_only field (row i = 0).
Eigen::VectorXd base_profile(const ScalarField& f);
ScalarField from_base_profile(GridPtr g, const Eigen::VectorXd& p);

/// Wedge-top density of two invariant (1,1)-forms:
/// a11 b22 + a22 b11 - 2 a12 b12 per node. The (2pi)^2 angular factor is
/// applied by the integral routines, never here.
ScalarField wedge_density(const TwoForm& a, const TwoForm& b);

}  // namespace fiblab
