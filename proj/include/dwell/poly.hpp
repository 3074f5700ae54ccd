#pragma once

#include <Eigen/Dense>
#include <vector>

namespace dwell {

/// Real polynomial with ascending coefficients. Coefficient functions of the
/// plant (B, D, alpha, beta, gamma) are instances; user-facing polynomials
/// are capped at degree 16, internal products at degree 32.
class Poly {
 public:
  Poly() = default;  // identically zero
  explicit Poly(std::vector<double> coeffs);

  double operator()(double z) const;
  Poly derivative() const;
  bool is_zero() const { return coeffs_.empty(); }
  int degree() const { return coeffs_.empty() ? 0 : int(coeffs_.size()) - 1; }
  const std::vector<double>& coeffs() const { return coeffs_; }

  static constexpr int kMaxUserDegree = 16;

 private:
  std::vector<double> coeffs_;  // empty means zero; trailing entry nonzero
};

Poly operator+(const Poly& p, const Poly& q);
Poly operator*(const Poly& p, const Poly& q);
Poly operator*(double s, const Poly& p);

/// n-point Gauss-Legendre rule mapped to [0, l]; exact for degree <= 2n-1.
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
QuadratureRule gauss_legendre(int n, double l);

/// Exact integral of p over [0, l].
double integrate(const Poly& p, double l);

// Exact polynomial norms on [0, l]. The C-norm maximizes |p| over the
// critical points of p' (sign-change isolation + bisection) and endpoints.
double l2_norm(const Poly& p, double l);
double h01_norm(const Poly& p, double l);
double c_norm(const Poly& p, double l);

}  // namespace dwell
