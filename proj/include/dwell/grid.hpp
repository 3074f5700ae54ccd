#pragma once

#include <Eigen/Dense>
#include <functional>

#include "dwell/poly.hpp"

namespace dwell {

/// Grid function on [0, l] with homogeneous Dirichlet ends: values at the
/// uniform nodes z_i = i*h, i = 0..n+1, h = l/(n+1), with values[0] =
/// values[n+1] = 0. Values are immutable after construction; the integrator
/// builds new instances.
class GridFunction {
 public:
  GridFunction(double l, int n_interior);  // identically zero
  GridFunction(double l, Eigen::VectorXd values);

  static GridFunction sample(const Poly& p, double l, int n_interior);
  static GridFunction sample(const std::function<double(double)>& f, double l,
                             int n_interior);

  double l() const { return l_; }
  int n() const { return int(values_.size()) - 2; }
  double h() const { return l_ / double(n() + 1); }
  double node(int i) const { return h() * double(i); }
  const Eigen::VectorXd& values() const { return values_; }

 private:
  double l_;
  Eigen::VectorXd values_;
};

/// Composite-trapezoid L2 norm (O(h^2)).
double l2_norm(const GridFunction& f);

/// Forward-difference H01 norm: sqrt(sum_i ((v[i+1]-v[i])/h)^2 * h).
double h01_norm(const GridFunction& f);

/// Trapezoid rule for \int_0^l f.
double trapezoid(const GridFunction& f);

/// Trapezoid rule for \int_0^l c(z) f(z) dz with c sampled on the same grid.
double trapezoid(const Eigen::VectorXd& coeff, const GridFunction& f);

/// Rayleigh ratio h01^2/l2^2 against the sharp discrete constant
/// (4/h^2) sin^2(pi h / (2l)); the ratio is >= the bound for every nonzero
/// grid function, and the bound -> pi^2/l^2 under refinement at O(h^2).
struct FriedrichsCheck {
  double ratio;
  double bound;
};
FriedrichsCheck friedrichs_check(const GridFunction& f);

}  // namespace dwell
