#include "dwell/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dwell {

namespace {
constexpr double kFloor = 1e-12;       // F diverges at 0
constexpr double kSimpsonTol = 1e-10;  // absolute quadrature tolerance
}  // namespace

RateFunction RateFunction::linear(double slope) {
  if (!(slope > 0)) throw std::invalid_argument("RateFunction: slope <= 0");
  return RateFunction(Kind::Linear, slope, 1.0);
}

RateFunction RateFunction::power(double coeff, double exponent) {
  if (!(coeff > 0) || !(exponent > 0))
    throw std::invalid_argument("RateFunction: power parameters must be > 0");
  return RateFunction(Kind::Power, coeff, exponent);
}

RateFunction RateFunction::tabulated(
    std::vector<std::pair<double, double>> samples) {
  return RateFunction(std::move(samples));
}

RateFunction::RateFunction(std::vector<std::pair<double, double>> samples)
    : kind_(Kind::Tabulated), table_(std::move(samples)) {
  if (table_.size() < 2)
    throw std::invalid_argument("RateFunction: table needs >= 2 samples");
  double px = 0, py = 0;  // implicit (0, 0) anchor
  for (const auto& [x, y] : table_) {
    if (!(x > px) || !(y > py))
      throw std::invalid_argument("RateFunction: table must be strictly "
                                  "increasing with positive entries");
    px = x;
    py = y;
  }
}

double RateFunction::operator()(double s) const {
  if (s < 0) throw std::invalid_argument("RateFunction: negative input");
  if (s == 0) return 0;
  switch (kind_) {
    case Kind::Linear:
      return a_ * s;
    case Kind::Power:
      return a_ * std::pow(s, b_);
    case Kind::Tabulated: {
      double px = 0, py = 0;
      for (const auto& [x, y] : table_) {
        if (s <= x) return py + (y - py) * (s - px) / (x - px);
        px = x;
        py = y;
      }
      const auto& [x1, y1] = table_[table_.size() - 2];
      const auto& [x2, y2] = table_.back();
      return y2 + (y2 - y1) / (x2 - x1) * (s - x2);
    }
  }
  return 0;
}

double RateFunction::inverse(double y) const {
  if (y < 0) throw std::invalid_argument("RateFunction: negative input");
  if (y == 0) return 0;
  switch (kind_) {
    case Kind::Linear:
      return y / a_;
    case Kind::Power:
      return std::pow(y / a_, 1.0 / b_);
    case Kind::Tabulated: {
      double px = 0, py = 0;
      for (const auto& [x, yy] : table_) {
        if (y <= yy) return px + (x - px) * (y - py) / (yy - py);
        px = x;
        py = yy;
      }
      const auto& [x1, y1] = table_[table_.size() - 2];
      const auto& [x2, y2] = table_.back();
      return x2 + (x2 - x1) / (y2 - y1) * (y - y2);
    }
  }
  return 0;
}

double RateFunction::slope() const {
  if (kind_ != Kind::Linear)
    throw std::logic_error("RateFunction: slope() on non-linear kind");
  return a_;
}

double phi_hat(const RateSet& rates, double s) {
  if (!(s > 0)) throw std::invalid_argument("phi_hat: s must be positive");
  return std::min({rates.phi1(s), rates.phi2(s), s});
}

namespace {

bool linear_hat(const RateSet& rates, double& mu) {
  if (rates.phi1.is_linear() && rates.phi2.is_linear()) {
    mu = std::min({rates.phi1.slope(), rates.phi2.slope(), 1.0});
    return true;
  }
  return false;
}

double adaptive_simpson(const RateSet& rates, double a, double b, double fa,
                        double fm, double fb, double whole, double tol,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = 1.0 / phi_hat(rates, lm);
  const double frm = 1.0 / phi_hat(rates, rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(rates, a, m, fa, flm, fm, left, 0.5 * tol,
                          depth - 1) +
         adaptive_simpson(rates, m, b, fm, frm, fb, right, 0.5 * tol,
                          depth - 1);
}

double quad_f(const RateSet& rates, double lo, double hi) {
  if (lo < kFloor)
    throw std::domain_error("f_integral: endpoint below the 1e-12 floor");
  const double m = 0.5 * (lo + hi);
  const double fa = 1.0 / phi_hat(rates, lo);
  const double fm = 1.0 / phi_hat(rates, m);
  const double fb = 1.0 / phi_hat(rates, hi);
  const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(rates, lo, hi, fa, fm, fb, whole, kSimpsonTol, 60);
}

}  // namespace

double f_integral(const RateSet& rates, double s, double q) {
  if (!(s > 0) || !(q > 0))
    throw std::invalid_argument("f_integral: endpoints must be positive");
  double mu;
  if (linear_hat(rates, mu)) return std::log(q / s) / mu;
  if (s == q) return 0;
  return s < q ? quad_f(rates, s, q) : -quad_f(rates, q, s);
}

double f_inverse(const RateSet& rates, double q, double r) {
  if (!(q > 0)) throw std::invalid_argument("f_inverse: q must be positive");
  if (r < 0) throw std::invalid_argument("f_inverse: r must be >= 0");
  if (r == 0) return q;
  double mu;
  if (linear_hat(rates, mu)) return q * std::exp(-mu * r);
  // F(., q) is strictly decreasing with F(q, q) = 0; walk the lower bracket
  // down and bisect. Width relative near zero so small roots keep digits.
  double hi = q, lo = 0.5 * q;
  while (f_integral(rates, lo, q) < r) {
    hi = lo;
    lo *= 0.5;
    if (lo < kFloor)
      throw std::domain_error("f_inverse: result below the 1e-12 floor");
  }
  while (hi - lo > 1e-10 * lo) {
    const double m = 0.5 * (lo + hi);
    if (m <= lo || m >= hi) break;  // bracket at machine resolution
    if (f_integral(rates, m, q) >= r)
      lo = m;
    else
      hi = m;
  }
  return 0.5 * (lo + hi);
}

double decay_envelope(const RateSet& rates, const RateFunction& alpha2,
                      double v0, double margin, long k) {
  if (v0 < 0) throw std::invalid_argument("decay_envelope: v0 must be >= 0");
  if (k < 0) throw std::invalid_argument("decay_envelope: k must be >= 0");
  if (v0 == 0) return 0;
  const double q = alpha2(v0);
  if (k == 0) return q;
  return f_inverse(rates, q, margin * double(k));
}

}  // namespace dwell
