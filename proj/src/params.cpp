#include "dwell/params.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dwell {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("ExampleParams: " + what);
}

bool vanishes_at_ends(const Poly& p, double l) {
  double scale = 1.0;
  for (double c : p.coeffs()) scale = std::max(scale, std::abs(c));
  return std::abs(p(0.0)) <= 1e-12 * scale && std::abs(p(l)) <= 1e-12 * scale;
}

}  // namespace

void ExampleParams::validate() const {
  require(a > 0, "a must be positive");
  require(c > 0, "c must be positive");
  require(l > 0, "l must be positive");
  require(kappa1 >= 0, "kappa1 must be >= 0");
  require(kappa3 >= 0, "kappa3 must be >= 0");
  if (epsilon) require(*epsilon > 0, "epsilon must be positive");
  for (const auto& [name, poly] :
       {std::pair<const char*, const Poly*>{"B_poly", &B_poly},
        {"D_poly", &D_poly},
        {"alpha_poly", &alpha_poly},
        {"beta_poly", &beta_poly},
        {"gamma_poly", &gamma_poly}})
    require(poly->degree() <= Poly::kMaxUserDegree,
            std::string(name) + " degree exceeds 16");
  require(vanishes_at_ends(B_poly, l), "B_poly must vanish at z=0 and z=l");
  require(vanishes_at_ends(beta_poly, l),
          "beta_poly must vanish at z=0 and z=l");
}

ExampleParams ExampleParams::reference() {
  ExampleParams p;
  p.a = 1.0;
  p.c = 0.5;
  p.l = M_PI;
  p.B_poly = Poly({0.0, 0.05 * M_PI, -0.05});  // 0.05 z (pi - z)
  p.D_poly = Poly({0.0, 0.05});
  p.alpha_poly = Poly({1.0});
  p.beta_poly = Poly{};
  p.gamma_poly = Poly({0.05});
  p.delta_jump = 0.25;
  p.kappa1 = 0.0;
  p.kappa3 = 1.0;
  return p;
}

}  // namespace dwell
