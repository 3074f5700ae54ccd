#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "dwell/certificate.hpp"

using namespace dwell;

namespace {

// published reference numbers for the built-in example
constexpr double kA12 = 0.3214875;
constexpr double kB11 = 1.007853982;
constexpr double kB12 = 0.02215567314;
constexpr double kLamA = 0.54067976;
constexpr double kLamB = 1.0083729;
constexpr double kSigma = 1.1146653;
constexpr double kVartheta = 0.42851243;

ExampleParams decoupled_params() {
  ExampleParams p;
  p.a = 1.0;
  p.c = 0.3;
  p.l = 1.0;
  p.alpha_poly = Poly({0.1});
  p.gamma_poly = Poly{};
  p.delta_jump = 0.2;
  return p;
}

}  // namespace

TEST_CASE("eig_sym2 closed form") {
  const EigSym2 id = eig_sym2(Sym2{1, 0, 1});
  CHECK(id.lam_min == doctest::Approx(1.0));
  CHECK(id.lam_max == doctest::Approx(1.0));
  CHECK(id.evec_max[0] == doctest::Approx(1.0));
  CHECK(id.evec_max[1] == doctest::Approx(0.0));

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> entry(-5.0, 5.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const Sym2 m{entry(rng), entry(rng), entry(rng)};
    const EigSym2 e = eig_sym2(m);
    const Eigen::Matrix2d M = m.matrix();
    const double scale = std::max(M.norm(), 1e-30);
    CHECK((M * e.evec_max - e.lam_max * e.evec_max).norm() <= 1e-12 * scale);
    CHECK(e.evec_max.norm() == doctest::Approx(1.0));
    CHECK(e.lam_min <= e.lam_max);
    // trace and determinant recovered
    CHECK(e.lam_min + e.lam_max == doctest::Approx(m.a11 + m.a22));
    CHECK(e.lam_min * e.lam_max ==
          doctest::Approx(m.a11 * m.a22 - m.a12 * m.a12)
              .epsilon(1e-10));
  }
}

TEST_CASE("reference-example matrices") {
  const ExampleParams p = ExampleParams::reference();
  const Sym2 a0 = build_A0(p);
  CHECK(a0.a11 == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(a0.a12 == doctest::Approx(kA12).epsilon(1e-7));
  CHECK(a0.a22 == doctest::Approx(0.5).epsilon(1e-12));
  // D alone contributes 0.05 sqrt(pi^3/3)
  CHECK(p.l / M_PI * l2_norm(p.D_poly, p.l) ==
        doctest::Approx(0.1607437).epsilon(1e-6));

  const Sym2 b0 = build_B0(p);
  CHECK(b0.a11 == doctest::Approx(kB11).epsilon(1e-9));
  CHECK(b0.a12 == doctest::Approx(kB12).epsilon(1e-9));
  CHECK(b0.a22 == doctest::Approx(0.0625).epsilon(1e-12));
  // off-diagonal is the constant-function L2 norm 0.0125 sqrt(pi)
  CHECK(b0.a12 == doctest::Approx(0.0125 * std::sqrt(M_PI)).epsilon(1e-13));

  const Sym2 b1 = build_B1(p);
  CHECK(b1.a11 ==
        doctest::Approx(1.0 + 0.05 * std::sqrt(M_PI)).epsilon(1e-13));
  CHECK(b1.a12 == 0.0);
  CHECK(b1.a22 == doctest::Approx(0.25).epsilon(1e-13));

  const Sym2 at = build_Atilde0(p);
  CHECK(at.a11 == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(at.a12 ==
        doctest::Approx(l2_norm(p.B_poly + p.D_poly, p.l)).epsilon(1e-13));

  // decoupled system: zero off-diagonal
  ExampleParams q = p;
  q.B_poly = Poly{};
  q.D_poly = Poly{};
  CHECK(build_A0(q).a12 == 0.0);

  // jump to the origin: zero matrix and kappa = 1
  ExampleParams z = p;
  z.alpha_poly = Poly{};
  z.beta_poly = Poly{};
  z.gamma_poly = Poly{};
  z.delta_jump = 0.0;
  const Sym2 zb = build_B0(z);
  CHECK(zb.a11 == 0.0);
  CHECK(zb.a12 == 0.0);
  CHECK(zb.a22 == 0.0);
  CHECK(kappa_eps(z, 0.3) == doctest::Approx(1.0));
  const auto [zsigma, zvar] = build_sigma_vartheta(z);
  CHECK(zsigma == 0.0);
  CHECK(zvar > 0);
  CHECK(kappa_eps(p, 1e12) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("sigma, vartheta, eigenpairs for the reference example") {
  const ExampleParams p = ExampleParams::reference();
  const auto [sigma, vartheta] = build_sigma_vartheta(p);
  CHECK(sigma == doctest::Approx(kSigma).epsilon(1e-7));
  CHECK(vartheta == doctest::Approx(kVartheta).epsilon(1e-7));

  const EigSym2 ea = eig_sym2(build_A0(p));
  CHECK(ea.lam_max == doctest::Approx(kLamA).epsilon(1e-7));
  CHECK(std::abs(ea.evec_max[0]) == doctest::Approx(0.12553504).epsilon(1e-5));
  CHECK(std::abs(ea.evec_max[1]) ==
        doctest::Approx(0.9920891862).epsilon(1e-6));

  const EigSym2 eb = eig_sym2(build_B0(p));
  CHECK(eb.lam_max == doctest::Approx(kLamB).epsilon(1e-7));
  CHECK(std::abs(eb.evec_max[0]) == doctest::Approx(0.99972578).epsilon(1e-6));
  CHECK(std::abs(eb.evec_max[1]) ==
        doctest::Approx(0.023417096).epsilon(1e-4));

  // variant with stable decoupled flow
  ExampleParams q = p;
  q.B_poly = Poly{};
  q.D_poly = Poly{};
  q.a = 1.0;
  q.l = 1.0;
  q.c = 0.1;
  const auto [s2, v2] = build_sigma_vartheta(q);
  (void)s2;
  CHECK(v2 == doctest::Approx(M_PI * M_PI - 0.01).epsilon(1e-12));
}

TEST_CASE("case classification and gates") {
  const CertificateReport ref = build_certificate(ExampleParams::reference());
  CHECK(ref.case_label == CaseLabel::b);
  CHECK(ref.form_B0 < 0);
  CHECK(ref.form_A0 > 0);
  CHECK(ref.feasible());

  // y-dominant top eigenvector of B0: case a
  const CertificateReport dec = build_certificate(decoupled_params());
  CHECK(dec.case_label == CaseLabel::a);
  CHECK(dec.form_B0 == doctest::Approx(1.0));
  CHECK(dec.window.has_value());
  CHECK(dec.window->theta1 == 0.0);  // negative closed-form lower, clamped

  // vartheta <= 0: infeasible with the gate named
  ExampleParams bad = ExampleParams::reference();
  bad.c = 4.0;
  const CertificateReport rep = build_certificate(bad);
  CHECK(rep.case_label == CaseLabel::infeasible);
  bool found = false;
  for (const auto& g : rep.gates)
    if (g.name == "vartheta" && !g.pass) found = true;
  CHECK(found);
}

TEST_CASE("dwell window per case") {
  const CertificateReport ref = build_certificate(ExampleParams::reference());
  REQUIRE(ref.window.has_value());
  CHECK(ref.window->theta1 == doctest::Approx(0.01945822).epsilon(1e-6));
  CHECK(ref.window->theta2 == doctest::Approx(1.0812185).epsilon(1e-4));
  CHECK(ref.window->margin > 0);

  // sigma = 2 in case b: upper endpoint ln(1) = 0, window empty
  CHECK_THROWS_AS(dwell_window(CaseLabel::b, 2.0, 0.5, 0.5, 1.2),
                  EmptyWindowError);
  // lam_max(B0) = 1 in case b: lower endpoint 0
  const DwellWindow w = dwell_window(CaseLabel::b, 1.0, 0.5, 0.5, 1.0);
  CHECK(w.theta1 == 0.0);
  CHECK(w.theta2 == doctest::Approx(std::log(2.0) / 0.5));
}

TEST_CASE("induced rates and the perturbed window") {
  const CertificateReport ref = build_certificate(ExampleParams::reference());
  REQUIRE(ref.rates.has_value());
  CHECK(ref.rates->phi1.slope() ==
        doctest::Approx(ref.vartheta - ref.epsilon));
  CHECK(ref.rates->phi2.slope() ==
        doctest::Approx(ref.lam_max_A0 + 2.0 * ref.epsilon));
  // case b: psi1 from lam_max(B0), psi2 from sigma/2
  CHECK(ref.rates->psi1.slope() ==
        doctest::Approx(ref.lam_max_B0 + ref.epsilon * (1.0 + ref.norm_B1)));
  CHECK(ref.rates->psi2.slope() ==
        doctest::Approx(ref.sigma / 2.0 + ref.epsilon * (1.0 + ref.norm_B1)));
  CHECK(ref.chi_slope ==
        doctest::Approx(std::max(std::sqrt(2.0) / ref.epsilon,
                                 std::sqrt(ref.kappa / ref.epsilon))));
  // perturbed window nests inside the eps -> 0 window and shrinks with eps
  const auto [lo, hi] = ref.window_eps;
  CHECK(lo > ref.window->theta1);
  CHECK(hi < ref.window->theta2);
  CHECK(lo < hi);
  CHECK(margin_for_window(*ref.rates, 0.5, 0.5) > 0);
  CHECK(margin_for_window(*ref.rates, 2.0, 2.0) < 0);
}

TEST_CASE("dwell conditions, closed forms") {
  // contractive jumps: condition on theta1 holds whenever theta1 >= delta
  RateSet rs{RateFunction::linear(0.5), RateFunction::linear(0.7),
             RateFunction::linear(0.9), RateFunction::linear(0.5),
             RateFunction::linear(1.0)};
  DwellWindow w{0.2, 0.4, 0.1};
  const A3A4Report rep = check_A3_A4(rs, w);
  CHECK(rep.pass);
  CHECK(rep.slack_a3 ==
        doctest::Approx(0.1 - std::log(0.9) / 0.5));
  CHECK(rep.slack_a4 == doctest::Approx(-std::log(0.5) / 0.7 - 0.5));

  // reference-example rates at small eps: a window strictly inside the
  // closed-form interval (0.01945822, 1.08121852) passes; the margin has to
  // stay below the endpoint slack.
  const CertificateReport ref = build_certificate(ExampleParams::reference());
  RateSet tight = induced_rates(CaseLabel::b, ref.sigma, ref.vartheta,
                                ref.lam_max_A0, ref.lam_max_B0, ref.norm_B1,
                                kappa_eps(ExampleParams::reference(), 1e-6),
                                1e-6);
  const A3A4Report ok = check_A3_A4(tight, DwellWindow{0.0196, 1.0811, 1e-5});
  CHECK(ok.pass);
  // a margin thicker than the theta1 slack must fail on the A3 side
  const A3A4Report thin =
      check_A3_A4(tight, DwellWindow{0.0195, 1.0811, 1e-4});
  CHECK(!thin.pass);
  CHECK(thin.slack_a3 < 0);
  CHECK(thin.slack_a4 > 0);

  // expanding jumps with a slow flow: the theta2 condition must fail
  RateSet failing{RateFunction::linear(0.5), RateFunction::linear(0.5),
                  RateFunction::linear(0.9), RateFunction::linear(1.1),
                  RateFunction::linear(1.0)};
  const A3A4Report bad = check_A3_A4(failing, DwellWindow{0.5, 1.0, 0.01});
  CHECK(!bad.pass);
  CHECK(bad.slack_a4 < 0);
}

TEST_CASE("dwell conditions, monotone in the window") {
  const CertificateReport ref = build_certificate(ExampleParams::reference());
  const RateSet& rs = *ref.rates;
  const auto [lo, hi] = ref.window_eps;
  const double margin = 1e-6;
  const DwellWindow inside{lo + 0.01, hi - 0.01, margin};
  CHECK(check_A3_A4(rs, inside).pass);
  // enlarging the window flips pass -> fail, never the reverse
  const DwellWindow low{lo - 0.01, hi - 0.01, margin};
  const DwellWindow high{lo + 0.01, hi + 0.01, margin};
  CHECK(!check_A3_A4(rs, low).pass);
  CHECK(!check_A3_A4(rs, high).pass);
}

TEST_CASE("dwell conditions on a tabulated grid") {
  // tabulated clones of linear rates take the geometric-grid path and agree
  // with the closed forms
  auto tab = [](double slope) {
    return RateFunction::tabulated({{1.0, slope}, {2.0, 2.0 * slope}});
  };
  RateSet rs{tab(0.5), tab(0.7), tab(0.9), tab(0.5), RateFunction::linear(1)};
  DwellWindow w{0.2, 0.4, 0.1};
  const A3A4Report rep = check_A3_A4(rs, w);
  CHECK(rep.pass);
  CHECK(rep.slack_a3 ==
        doctest::Approx(0.1 - std::log(0.9) / 0.5).epsilon(1e-6));
  CHECK(rep.slack_a4 ==
        doctest::Approx(-std::log(0.5) / 0.7 - 0.5).epsilon(1e-6));
  CHECK(std::isfinite(rep.witness_a));
}

TEST_CASE("reach bound composition") {
  const RateFunction id = RateFunction::linear(1.0);
  const AssumptionBounds ident{id, id, id, id, 1.0};
  CHECK(reach_bound_R(ident, id, id, 0.0, 0.0) == 0.0);
  // R1=2, R2=2, R3=max(3,2)=3, R4=4, R5=3, R6=4 -> R = 4
  CHECK(reach_bound_R(ident, id, id, 1.0, 1.0) == doctest::Approx(4.0));

  // monotone in each argument on a sampled grid, and >= max(R1, s)
  const AssumptionBounds b{RateFunction::linear(1.3),
                           RateFunction::linear(0.4),
                           RateFunction::linear(1.1),
                           RateFunction::linear(0.7), 2.0};
  const RateFunction a1 = RateFunction::power(1.0, 2.0);
  const RateFunction a2 = RateFunction::power(1.0, 2.0);
  double prev_row = -1;
  for (double s : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    double prev = -1;
    for (double q : {0.0, 0.5, 1.0, 2.0, 4.0}) {
      const double r = reach_bound_R(b, a1, a2, s, q);
      CHECK(r >= s);
      CHECK(r >= 1.3 * s + 0.4 * q - 1e-12);  // R1
      CHECK(r >= prev - 1e-12);
      prev = r;
    }
    const double at_one = reach_bound_R(b, a1, a2, s, 1.0);
    CHECK(at_one >= prev_row - 1e-12);
    prev_row = at_one;
  }
}

TEST_CASE("flow and jump growth bounds") {
  const ExampleParams p = ExampleParams::reference();
  // tau -> 0+: no elapsed time
  const auto [xi0, eta0] = flow_bound_slopes(kLamA, 0.01, 1e-12);
  CHECK(xi0 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(eta0 == doctest::Approx(0.0).epsilon(1e-5));

  const AssumptionBounds b = assumption1_bounds(p, 0.01, 1.0);
  CHECK(b.xi_tau.slope() ==
        doctest::Approx(std::exp(0.5 * (kLamA + 0.01))).epsilon(1e-7));
  CHECK(b.eta_tau.slope() ==
        doctest::Approx(std::sqrt(std::expm1(kLamA + 0.01) / (0.01 * (kLamA + 0.01))))
            .epsilon(1e-7));
  const CertificateReport rep = build_certificate(p);
  CHECK(b.xi.slope() ==
        doctest::Approx(std::sqrt(kLamB + 0.01 * rep.norm_B1)).epsilon(1e-6));
  CHECK(b.eta.slope() ==
        doctest::Approx(std::sqrt(kappa_eps(p, 0.01))).epsilon(1e-12));

  // strongly stable sign analysis: eta stays bounded as tau -> infinity
  const double lam = -1.5, eps = 0.25;
  double prev = 0;
  for (double tau : {1.0, 10.0, 100.0, 1000.0}) {
    const auto [xi, eta] = flow_bound_slopes(lam, eps, tau);
    CHECK(xi <= 1.0);
    CHECK(std::isfinite(eta));
    CHECK(eta >= prev - 1e-12);
    prev = eta;
  }
  CHECK(prev <= std::sqrt(1.0 / (eps * (-lam - eps + 1.0e-30))) + 1.0);
  // m -> 0 limit: integral -> tau
  const auto [ximid, etamid] = flow_bound_slopes(-0.25, 0.25, 2.0);
  CHECK(ximid == doctest::Approx(1.0));
  CHECK(etamid == doctest::Approx(std::sqrt(2.0 / 0.25)).epsilon(1e-6));
}

TEST_CASE("epsilon selection and overrides") {
  const ExampleParams p = ExampleParams::reference();
  const double eps = select_epsilon(p);
  CHECK(eps > 0);
  CHECK(eps < build_sigma_vartheta(p).second);
  ExampleParams q = p;
  q.epsilon = 0.01;
  CHECK(build_certificate(q).epsilon == doctest::Approx(0.01));
  q.epsilon = 10.0;  // >= vartheta: rejected
  CHECK_THROWS_AS(build_certificate(q), std::invalid_argument);
}
