#include "dwell/poly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dwell {

namespace {
constexpr int kMaxInternalDegree = 32;
}

Poly::Poly(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
  if (degree() > kMaxInternalDegree)
    throw std::invalid_argument("Poly: degree exceeds " +
                                std::to_string(kMaxInternalDegree));
}

double Poly::operator()(double z) const {
  double acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
    acc = acc * z + *it;
  return acc;
}

Poly Poly::derivative() const {
  if (coeffs_.size() <= 1) return Poly{};
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i)
    d[i - 1] = double(i) * coeffs_[i];
  return Poly(std::move(d));
}

Poly operator+(const Poly& p, const Poly& q) {
  std::vector<double> c(std::max(p.coeffs().size(), q.coeffs().size()), 0.0);
  for (std::size_t i = 0; i < p.coeffs().size(); ++i) c[i] += p.coeffs()[i];
  for (std::size_t i = 0; i < q.coeffs().size(); ++i) c[i] += q.coeffs()[i];
  return Poly(std::move(c));
}

Poly operator*(const Poly& p, const Poly& q) {
  if (p.is_zero() || q.is_zero()) return Poly{};
  std::vector<double> c(p.coeffs().size() + q.coeffs().size() - 1, 0.0);
  for (std::size_t i = 0; i < p.coeffs().size(); ++i)
    for (std::size_t j = 0; j < q.coeffs().size(); ++j)
      c[i + j] += p.coeffs()[i] * q.coeffs()[j];
  return Poly(std::move(c));
}

Poly operator*(double s, const Poly& p) {
  std::vector<double> c = p.coeffs();
  for (double& x : c) x *= s;
  return Poly(std::move(c));
}

QuadratureRule gauss_legendre(int n, double l) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Newton on P_n with the three-term recurrence; nodes symmetric in [-1,1].
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (double(i) + 0.75) / (double(n) + 0.5));
    double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      if (n == 1) p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / double(k);
        p0 = p1;
        p1 = p2;
      }
      double pn = (n == 1) ? x : p1;
      double pm = (n == 1) ? 1.0 : p0;
      dp = double(n) * (x * pn - pm) / (x * x - 1.0);
      double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = l * 0.5 * (1.0 - x);  // descending cos roots -> ascending z
    rule.nodes[n - 1 - i] = l * 0.5 * (1.0 + x);
    rule.weights[i] = w * l * 0.5;
    rule.weights[n - 1 - i] = w * l * 0.5;
  }
  return rule;
}

double integrate(const Poly& p, double l) {
  if (p.is_zero()) return 0;
  const int n = p.degree() / 2 + 1;
  const QuadratureRule rule = gauss_legendre(n, l);
  double acc = 0;
  for (int i = 0; i < rule.nodes.size(); ++i)
    acc += rule.weights[i] * p(rule.nodes[i]);
  return acc;
}

double l2_norm(const Poly& p, double l) {
  if (p.is_zero()) return 0;
  const int n = p.degree() + 1;  // integrand degree 2*deg
  const QuadratureRule rule = gauss_legendre(n, l);
  double acc = 0;
  for (int i = 0; i < rule.nodes.size(); ++i) {
    const double v = p(rule.nodes[i]);
    acc += rule.weights[i] * v * v;
  }
  return std::sqrt(std::max(acc, 0.0));
}

double h01_norm(const Poly& p, double l) { return l2_norm(p.derivative(), l); }

double c_norm(const Poly& p, double l) {
  if (p.is_zero()) return 0;
  double best = std::max(std::abs(p(0.0)), std::abs(p(l)));
  const Poly dp = p.derivative();
  if (dp.is_zero()) return best;
  // Critical points: sign changes of p' on a dense grid, bisected down.
  const int kGrid = 1 << 14;
  double prev_z = 0.0, prev_v = dp(0.0);
  for (int i = 1; i <= kGrid; ++i) {
    const double z = l * double(i) / double(kGrid);
    const double v = dp(z);
    if (prev_v == 0.0) best = std::max(best, std::abs(p(prev_z)));
    if ((prev_v < 0 && v > 0) || (prev_v > 0 && v < 0)) {
      double a = prev_z, b = z, fa = prev_v;
      while (b - a > 1e-12 * std::max(1.0, l)) {
        const double m = 0.5 * (a + b);
        const double fm = dp(m);
        if (fm == 0.0) {
          a = b = m;
          break;
        }
        if ((fa < 0) == (fm < 0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      best = std::max(best, std::abs(p(0.5 * (a + b))));
    }
    best = std::max(best, std::abs(p(z)));  // grid safety net
    prev_z = z;
    prev_v = v;
  }
  return best;
}

}  // namespace dwell
