#include "dwell/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace dwell {

namespace {
void check_sizes(double l, int n) {
  if (l <= 0) throw std::invalid_argument("GridFunction: l must be positive");
  if (n < 3) throw std::invalid_argument("GridFunction: n must be >= 3");
}
}  // namespace

GridFunction::GridFunction(double l, int n_interior) : l_(l) {
  check_sizes(l, n_interior);
  values_ = Eigen::VectorXd::Zero(n_interior + 2);
}

GridFunction::GridFunction(double l, Eigen::VectorXd values)
    : l_(l), values_(std::move(values)) {
  check_sizes(l, int(values_.size()) - 2);
  const double scale = std::max(1.0, values_.cwiseAbs().maxCoeff());
  if (std::abs(values_[0]) > 1e-12 * scale ||
      std::abs(values_[values_.size() - 1]) > 1e-12 * scale)
    throw std::invalid_argument("GridFunction: Dirichlet ends must vanish");
  values_[0] = 0.0;
  values_[values_.size() - 1] = 0.0;
}

GridFunction GridFunction::sample(const Poly& p, double l, int n_interior) {
  check_sizes(l, n_interior);
  Eigen::VectorXd v(n_interior + 2);
  const double h = l / double(n_interior + 1);
  for (int i = 0; i <= n_interior + 1; ++i) v[i] = p(h * double(i));
  return GridFunction(l, std::move(v));
}

GridFunction GridFunction::sample(const std::function<double(double)>& f,
                                  double l, int n_interior) {
  check_sizes(l, n_interior);
  Eigen::VectorXd v(n_interior + 2);
  const double h = l / double(n_interior + 1);
  for (int i = 0; i <= n_interior + 1; ++i) v[i] = f(h * double(i));
  return GridFunction(l, std::move(v));
}

double l2_norm(const GridFunction& f) {
  // Trapezoid of f^2; the end contributions vanish with the Dirichlet ends.
  const Eigen::VectorXd& v = f.values();
  const int n = f.n();
  double acc = 0;
  for (int i = 1; i <= n; ++i) acc += v[i] * v[i];
  return std::sqrt(acc * f.h());
}

double h01_norm(const GridFunction& f) {
  const Eigen::VectorXd& v = f.values();
  const int n = f.n();
  const double h = f.h();
  double acc = 0;
  for (int i = 0; i <= n; ++i) {
    const double d = (v[i + 1] - v[i]) / h;
    acc += d * d;
  }
  return std::sqrt(acc * h);
}

double trapezoid(const GridFunction& f) {
  const Eigen::VectorXd& v = f.values();
  const int n = f.n();
  double acc = 0.5 * (v[0] + v[n + 1]);
  for (int i = 1; i <= n; ++i) acc += v[i];
  return acc * f.h();
}

double trapezoid(const Eigen::VectorXd& coeff, const GridFunction& f) {
  const Eigen::VectorXd& v = f.values();
  const int n = f.n();
  if (coeff.size() != v.size())
    throw std::invalid_argument("trapezoid: coefficient grid mismatch");
  double acc = 0.5 * (coeff[0] * v[0] + coeff[n + 1] * v[n + 1]);
  for (int i = 1; i <= n; ++i) acc += coeff[i] * v[i];
  return acc * f.h();
}

FriedrichsCheck friedrichs_check(const GridFunction& f) {
  const double l2 = l2_norm(f);
  if (l2 == 0.0)
    throw std::invalid_argument("friedrichs_check: zero grid function");
  const double h01 = h01_norm(f);
  const double h = f.h();
  const double s = std::sin(M_PI * h / (2.0 * f.l()));
  return {h01 * h01 / (l2 * l2), 4.0 / (h * h) * s * s};
}

}  // namespace dwell
