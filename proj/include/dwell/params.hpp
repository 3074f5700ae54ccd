#pragma once

#include <optional>

#include "dwell/poly.hpp"

namespace dwell {

/// Plant description for the coupled parabolic-PDE / scalar-ODE system
///
///   x_t = a^2 x_zz + Phi(x) + B(z) y + d11,     x(0,t) = x(l,t) = 0,
///   y'  = c^2 y + \int_0^l D(z) x dz + d12,
///
/// with jumps x^+ = alpha(z) x + beta(z) y + d21,
///            y^+ = \int_0^l gamma(z) x dz + delta_jump * y + d22,
///
/// and Phi(s) = -kappa1 s - kappa3 s^3 (so Phi' <= 0 and s Phi(s) <= 0).
struct ExampleParams {
  double a = 1.0;
  double c = 0.5;
  double l = 3.141592653589793;

  Poly B_poly;      // must vanish at z = 0 and z = l
  Poly D_poly;
  Poly alpha_poly;
  Poly beta_poly;   // must vanish at z = 0 and z = l
  Poly gamma_poly;
  double delta_jump = 0;

  double kappa1 = 0;
  double kappa3 = 0;

  /// Free constant of the certificate estimates; when absent a default is
  /// chosen from the gate slacks (see certificate::select_epsilon).
  std::optional<double> epsilon;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// Built-in reference plant: a=1, l=pi, D=0.05z, B=0.05z(pi-z), c=0.5,
  /// alpha=1, beta=0, gamma=0.05, delta_jump=0.25, Phi(s)=-s^3.
  static ExampleParams reference();
};

}  // namespace dwell
