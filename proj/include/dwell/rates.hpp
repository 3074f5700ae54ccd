#pragma once

#include <utility>
#include <vector>

namespace dwell {

/// Scalar comparison function: vanishes at zero, strictly positive on
/// positive inputs. Linear and power kinds are strictly increasing (class K);
/// the tabulated kind interpolates a strictly increasing table through the
/// origin and extrapolates with the last segment slope.
class RateFunction {
 public:
  static RateFunction linear(double slope);
  static RateFunction power(double coeff, double exponent);
  static RateFunction tabulated(std::vector<std::pair<double, double>> samples);

  double operator()(double s) const;

  /// Unique x >= 0 with r(x) == y (class-K kinds).
  double inverse(double y) const;

  bool is_linear() const { return kind_ == Kind::Linear; }
  double slope() const;  // linear kind only

 private:
  enum class Kind { Linear, Power, Tabulated };
  RateFunction(Kind k, double a, double b) : kind_(k), a_(a), b_(b) {}
  explicit RateFunction(std::vector<std::pair<double, double>> samples);

  Kind kind_ = Kind::Linear;
  double a_ = 1;  // slope / coefficient
  double b_ = 1;  // exponent
  std::vector<std::pair<double, double>> table_;
};

/// The rate bundle of a dwell-time certificate: flow rates phi1 (contraction
/// in G-), phi2 (expansion bound in G+), jump rates psi1/psi2, and the
/// disturbance threshold gain chi.
struct RateSet {
  RateFunction phi1, phi2, psi1, psi2, chi;
};

/// Admissible dwell-time interval with the uniform slack delta that turns
/// per-period estimates into geometric decay.
struct DwellWindow {
  double theta1 = 0;
  double theta2 = 0;
  double margin = 0;
};

/// min{phi1(s), phi2(s), s} for s > 0.
double phi_hat(const RateSet& rates, double s);

/// F(s, q) = \int_s^q d(sigma)/phi_hat(sigma). Closed form (1/mu) ln(q/s)
/// when both phi rates are linear (phi_hat has slope mu = min{c1, c2, 1});
/// adaptive Simpson otherwise, with a hard floor of 1e-12 on the endpoints
/// (F diverges at 0).
double f_integral(const RateSet& rates, double s, double q);

/// Unique x with F(x, q) = r for r >= 0; q exp(-mu r) in the linear case,
/// bisection on F otherwise. Strictly decreasing in r, increasing in q.
double f_inverse(const RateSet& rates, double q, double r);

/// Upper envelope for v(tau_k^+): F^{-1}(alpha2(v0), k*margin), with the
/// convention that v0 = 0 maps to 0 for every k.
double decay_envelope(const RateSet& rates, const RateFunction& alpha2,
                      double v0, double margin, long k);

}  // namespace dwell
