#include "dwell/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dwell {

Eigen::Matrix2d Sym2::matrix() const {
  Eigen::Matrix2d m;
  m << a11, a12, a12, a22;
  return m;
}

double Sym2::spectral_norm() const {
  const EigSym2 e = eig_sym2(*this);
  return std::max(std::abs(e.lam_min), std::abs(e.lam_max));
}

EigSym2 eig_sym2(const Sym2& m) {
  EigSym2 out;
  const double mean = 0.5 * (m.a11 + m.a22);
  const double half_diff = 0.5 * (m.a11 - m.a22);
  const double radius = std::hypot(half_diff, m.a12);
  out.lam_min = mean - radius;
  out.lam_max = mean + radius;
  const double scale =
      std::max({std::abs(m.a11), std::abs(m.a12), std::abs(m.a22)});
  if (radius <= 1e-300 || std::abs(m.a12) <= 1e-16 * std::max(scale, 1.0)) {
    // (numerically) diagonal; degenerate pairs get the (1,0) convention
    out.evec_max =
        m.a11 >= m.a22 ? Eigen::Vector2d(1, 0) : Eigen::Vector2d(0, 1);
    return out;
  }
  // Pick the better-conditioned row of (M - lam_max I) v = 0.
  Eigen::Vector2d v1(m.a12, out.lam_max - m.a11);
  Eigen::Vector2d v2(out.lam_max - m.a22, m.a12);
  Eigen::Vector2d v = v1.norm() >= v2.norm() ? v1 : v2;
  v.normalize();
  const double lead = std::abs(v[0]) > 0 ? v[0] : v[1];
  if (lead < 0) v = -v;
  out.evec_max = v;
  return out;
}

std::string to_string(CaseLabel c) {
  switch (c) {
    case CaseLabel::a: return "a";
    case CaseLabel::b: return "b";
    case CaseLabel::infeasible: return "infeasible";
  }
  return "?";
}

Sym2 build_A0(const ExampleParams& p) {
  Sym2 m;
  m.a11 = -2.0 * M_PI * M_PI * p.a * p.a / (p.l * p.l);
  m.a12 = h01_norm(p.B_poly, p.l) + p.l / M_PI * l2_norm(p.D_poly, p.l);
  m.a22 = 2.0 * p.c * p.c;
  return m;
}

Sym2 build_B0(const ExampleParams& p) {
  const double l = p.l;
  const double r = l * l / (M_PI * M_PI);
  const Poly alpha_z = p.alpha_poly.derivative();
  const Poly alpha_zz = alpha_z.derivative();
  const Poly beta_z = p.beta_poly.derivative();
  const double g_l2 = l2_norm(p.gamma_poly, l);
  Sym2 m;
  m.a11 = c_norm(p.alpha_poly * p.alpha_poly, l) +
          r * c_norm(p.alpha_poly * alpha_zz, l) + r * g_l2 * g_l2;
  m.a12 = l / M_PI *
              l2_norm(alpha_z * beta_z + p.delta_jump * p.gamma_poly, l) +
          l2_norm(p.alpha_poly * beta_z, l);
  const double b_h01 = h01_norm(p.beta_poly, l);
  m.a22 = p.delta_jump * p.delta_jump + b_h01 * b_h01;
  return m;
}

Sym2 build_B1(const ExampleParams& p) {
  const double r = p.l * p.l / (M_PI * M_PI);
  Sym2 m;
  m.a11 = r * c_norm(p.alpha_poly.derivative(), p.l) +
          c_norm(p.alpha_poly, p.l) + r * l2_norm(p.gamma_poly, p.l);
  m.a12 = 0;
  m.a22 = h01_norm(p.beta_poly, p.l) + std::abs(p.delta_jump);
  return m;
}

Sym2 build_Atilde0(const ExampleParams& p) {
  Sym2 m;
  m.a11 = -2.0 * M_PI * M_PI * p.a * p.a / (p.l * p.l);
  m.a12 = l2_norm(p.B_poly + p.D_poly, p.l);
  m.a22 = 2.0 * p.c * p.c;
  return m;
}

double kappa_eps(const ExampleParams& p, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("kappa_eps: eps must be > 0");
  const double first = c_norm(p.alpha_poly.derivative(), p.l) +
                       h01_norm(p.beta_poly, p.l) + c_norm(p.alpha_poly, p.l);
  const double second = std::abs(p.delta_jump) + l2_norm(p.gamma_poly, p.l);
  return std::max(1.0 + first / eps, 1.0 + second / eps);
}

std::pair<double, double> build_sigma_vartheta(const ExampleParams& p) {
  const Sym2 b0 = build_B0(p);
  const double sigma = b0.a11 + 2.0 * b0.a12 + b0.a22;
  const double vartheta = M_PI * M_PI * p.a * p.a / (p.l * p.l) -
                          h01_norm(p.B_poly, p.l) -
                          p.l / M_PI * l2_norm(p.D_poly, p.l) - p.c * p.c;
  return {sigma, vartheta};
}

DwellWindow dwell_window(CaseLabel label, double sigma, double vartheta,
                         double lam_max_A0, double lam_max_B0) {
  if (label == CaseLabel::infeasible)
    throw std::logic_error("dwell_window: infeasible case");
  double lower, upper;
  if (label == CaseLabel::a) {
    lower = std::log(sigma / 2.0) / vartheta;
    upper = -std::log(lam_max_B0) / lam_max_A0;
  } else {
    lower = std::log(lam_max_B0) / vartheta;
    upper = std::log(2.0 / sigma) / lam_max_A0;
  }
  lower = std::max(lower, 0.0);
  if (!(lower < upper))
    throw EmptyWindowError("dwell window is empty: lower " +
                           std::to_string(lower) + " >= upper " +
                           std::to_string(upper));
  DwellWindow w;
  w.theta1 = lower;
  w.theta2 = upper;
  w.margin = 0;
  return w;
}

RateSet induced_rates(CaseLabel label, double sigma, double vartheta,
                      double lam_max_A0, double lam_max_B0, double norm_B1,
                      double kappa, double eps) {
  if (label == CaseLabel::infeasible)
    throw std::logic_error("induced_rates: infeasible case");
  if (!(eps > 0) || !(eps < vartheta))
    throw std::invalid_argument("induced_rates: need 0 < eps < vartheta");
  const double bump = eps * (1.0 + norm_B1);
  const double jump_gplus = (label == CaseLabel::a)
                                ? lam_max_B0 + bump   // psi2
                                : sigma / 2.0 + bump;
  const double jump_gminus = (label == CaseLabel::a)
                                 ? sigma / 2.0 + bump  // psi1
                                 : lam_max_B0 + bump;
  const double chi = std::max(std::sqrt(2.0) / eps, std::sqrt(kappa / eps));
  return RateSet{RateFunction::linear(vartheta - eps),
                 RateFunction::linear(lam_max_A0 + 2.0 * eps),
                 RateFunction::linear(jump_gminus),
                 RateFunction::linear(jump_gplus),
                 RateFunction::linear(chi)};
}

std::pair<double, double> rate_window(const RateSet& rates) {
  const double c1 = rates.phi1.slope();
  const double c2 = rates.phi2.slope();
  const double k1 = rates.psi1.slope();
  const double k2 = rates.psi2.slope();
  return {std::log(k1) / c1, -std::log(k2) / c2};
}

double margin_for_window(const RateSet& rates, double theta1, double theta2) {
  const auto [lo, hi] = rate_window(rates);
  return 0.5 * std::min(theta1 - lo, hi - theta2);
}

namespace {

// Signed \int_from^to ds/phi(s) by composite Simpson with refinement.
double integral_inv_rate(const RateFunction& phi, double from, double to) {
  if (from == to) return 0;
  const double sign = from < to ? 1.0 : -1.0;
  const double lo = std::min(from, to), hi = std::max(from, to);
  if (lo < 1e-12)
    throw std::domain_error("integral_inv_rate: endpoint below 1e-12");
  auto simpson = [&](int intervals) {
    const double step = (hi - lo) / double(intervals);
    double acc = 1.0 / phi(lo) + 1.0 / phi(hi);
    for (int i = 1; i < intervals; ++i)
      acc += (i % 2 ? 4.0 : 2.0) / phi(lo + step * double(i));
    return acc * step / 3.0;
  };
  double prev = simpson(64), cur = simpson(128);
  for (int n = 256; n <= (1 << 20) && std::abs(cur - prev) > 1e-10; n *= 2) {
    prev = cur;
    cur = simpson(n);
  }
  return sign * cur;
}

}  // namespace

A3A4Report check_A3_A4(const RateSet& rates, const DwellWindow& window) {
  A3A4Report rep;
  const double t1 = window.theta1 - window.margin;
  const double t2 = window.theta2 + window.margin;
  const bool all_linear = rates.phi1.is_linear() && rates.phi2.is_linear() &&
                          rates.psi1.is_linear() && rates.psi2.is_linear();
  if (all_linear) {
    // a-independent closed forms: ln(k1)/c1 <= theta1 - delta and
    // -ln(k2)/c2 >= theta2 + delta.
    rep.slack_a3 = t1 - std::log(rates.psi1.slope()) / rates.phi1.slope();
    rep.slack_a4 = -std::log(rates.psi2.slope()) / rates.phi2.slope() - t2;
    rep.witness_a = std::numeric_limits<double>::quiet_NaN();
  } else {
    rep.slack_a3 = std::numeric_limits<double>::infinity();
    rep.slack_a4 = std::numeric_limits<double>::infinity();
    // Geometric grid over a in [1e-6, 1e6], four points per decade.
    const int per_decade = 4;
    for (int i = -6 * per_decade; i <= 6 * per_decade; ++i) {
      const double a = std::pow(10.0, double(i) / double(per_decade));
      const double s3 = t1 - integral_inv_rate(rates.phi1, a, rates.psi1(a));
      const double s4 = integral_inv_rate(rates.phi2, rates.psi2(a), a) - t2;
      if (std::min(s3, s4) < std::min(rep.slack_a3, rep.slack_a4))
        rep.witness_a = a;
      rep.slack_a3 = std::min(rep.slack_a3, s3);
      rep.slack_a4 = std::min(rep.slack_a4, s4);
    }
  }
  rep.worst_slack = std::min(rep.slack_a3, rep.slack_a4);
  rep.pass = rep.worst_slack >= 0;
  return rep;
}

std::pair<double, double> flow_bound_slopes(double lam, double eps,
                                            double tau) {
  if (!(tau > 0) || !(eps > 0))
    throw std::invalid_argument("flow_bound_slopes: need tau > 0, eps > 0");
  const double m = lam + eps;
  const double growth = std::exp(0.5 * m * tau);
  // (e^{m tau} - 1)/m -> tau as m -> 0
  const double integral = std::abs(m) > 1e-12 ? std::expm1(m * tau) / m : tau;
  return {growth, std::sqrt(integral / eps)};
}

AssumptionBounds assumption1_bounds(const ExampleParams& p, double eps,
                                    double tau) {
  const double lamA = eig_sym2(build_A0(p)).lam_max;
  const double lamB = eig_sym2(build_B0(p)).lam_max;
  const double normB1 = build_B1(p).spectral_norm();
  const auto [growth, eta_slope] = flow_bound_slopes(lamA, eps, tau);
  return AssumptionBounds{
      RateFunction::linear(growth), RateFunction::linear(eta_slope),
      RateFunction::linear(std::sqrt(lamB + eps * normB1)),
      RateFunction::linear(std::sqrt(kappa_eps(p, eps))), tau};
}

double reach_bound_R(const AssumptionBounds& bounds,
                     const RateFunction& alpha1, const RateFunction& alpha2,
                     double s, double q) {
  if (s < 0 || q < 0)
    throw std::invalid_argument("reach_bound_R: arguments must be >= 0");
  const auto& xt = bounds.xi_tau;
  const auto& et = bounds.eta_tau;
  const auto& xi = bounds.xi;
  const auto& eta = bounds.eta;
  const double r1 = xt(s) + et(q);
  const double r2 = xi(s) + eta(q);
  const double r3 = std::max(xi(r1) + eta(q), r2);
  const double r4 = xt(r3) + et(q);
  const double r5 = alpha1.inverse(alpha2(r3));
  const double r6 = xt(r5) + et(q);
  return std::max({r1, r4, r6, s});
}

double select_epsilon(const ExampleParams& p) {
  const Sym2 a0 = build_A0(p);
  const Sym2 b0 = build_B0(p);
  const EigSym2 ea = eig_sym2(a0);
  const EigSym2 eb = eig_sym2(b0);
  const auto [sigma, vartheta] = build_sigma_vartheta(p);
  const double wdot = p.c * p.c + M_PI * M_PI * p.a * p.a / (p.l * p.l) -
                      a0.a12;
  const double form_a = -ea.evec_max[0] * ea.evec_max[0] +
                        ea.evec_max[1] * ea.evec_max[1];
  const double form_b = -eb.evec_max[0] * eb.evec_max[0] +
                        eb.evec_max[1] * eb.evec_max[1];
  std::vector<double> slacks{vartheta, wdot, form_a, std::abs(form_b)};
  const CaseLabel label = form_b >= 0 ? CaseLabel::a : CaseLabel::b;
  if (label == CaseLabel::a) {
    slacks.push_back(1.0 - eb.lam_max);
  } else {
    slacks.push_back(2.0 - sigma);
  }
  try {
    const DwellWindow w =
        dwell_window(label, sigma, vartheta, ea.lam_max, eb.lam_max);
    slacks.push_back(w.theta2 - w.theta1);
  } catch (const EmptyWindowError&) {
  }
  double g = std::numeric_limits<double>::infinity();
  for (double s : slacks)
    if (s > 0) g = std::min(g, s);
  if (!std::isfinite(g)) g = 1.0;
  return g / 100.0;
}

CertificateReport build_certificate(const ExampleParams& p) {
  p.validate();
  CertificateReport rep;
  rep.A0 = build_A0(p);
  rep.B0 = build_B0(p);
  rep.B1 = build_B1(p);
  rep.Atilde0 = build_Atilde0(p);
  std::tie(rep.sigma, rep.vartheta) = build_sigma_vartheta(p);
  const EigSym2 ea = eig_sym2(rep.A0);
  const EigSym2 eb = eig_sym2(rep.B0);
  rep.lam_max_A0 = ea.lam_max;
  rep.lam_max_B0 = eb.lam_max;
  rep.evec_A0 = ea.evec_max;
  rep.evec_B0 = eb.evec_max;
  rep.form_A0 = -ea.evec_max[0] * ea.evec_max[0] +
                ea.evec_max[1] * ea.evec_max[1];
  rep.form_B0 = -eb.evec_max[0] * eb.evec_max[0] +
                eb.evec_max[1] * eb.evec_max[1];
  rep.norm_B1 = rep.B1.spectral_norm();
  rep.epsilon = p.epsilon.value_or(select_epsilon(p));
  rep.kappa = kappa_eps(p, rep.epsilon);
  rep.chi_slope = std::max(std::sqrt(2.0) / rep.epsilon,
                           std::sqrt(rep.kappa / rep.epsilon));

  const double wdot_gate = p.c * p.c +
                           M_PI * M_PI * p.a * p.a / (p.l * p.l) - rep.A0.a12;
  rep.gates.push_back({"vartheta", rep.vartheta, rep.vartheta > 0});
  rep.gates.push_back({"wdot", wdot_gate, wdot_gate > 0});
  rep.gates.push_back({"A0_form", rep.form_A0, rep.form_A0 > 0});
  const bool feasible_gates =
      rep.vartheta > 0 && wdot_gate > 0 && rep.form_A0 > 0;
  if (!feasible_gates) {
    rep.case_label = CaseLabel::infeasible;
    return rep;
  }
  rep.case_label = rep.form_B0 >= 0 ? CaseLabel::a : CaseLabel::b;

  if (p.epsilon && !(*p.epsilon < rep.vartheta))
    throw std::invalid_argument(
        "ExampleParams: epsilon must be < vartheta = " +
        std::to_string(rep.vartheta));
  rep.rates = induced_rates(rep.case_label, rep.sigma, rep.vartheta,
                            rep.lam_max_A0, rep.lam_max_B0, rep.norm_B1,
                            rep.kappa, rep.epsilon);
  rep.window_eps = rate_window(*rep.rates);
  try {
    DwellWindow w = dwell_window(rep.case_label, rep.sigma, rep.vartheta,
                                 rep.lam_max_A0, rep.lam_max_B0);
    // Margin of the most conservative admissible schedule: the singleton
    // dwell time at the midpoint of the eps-perturbed window.
    const double mid = 0.5 * (rep.window_eps.first + rep.window_eps.second);
    w.margin = std::max(margin_for_window(*rep.rates, mid, mid), 0.0);
    rep.window = w;
    rep.gates.push_back({"window", w.theta2 - w.theta1, true});
  } catch (const EmptyWindowError&) {
    rep.gates.push_back({"window", 0.0, false});
  }
  return rep;
}

}  // namespace dwell
