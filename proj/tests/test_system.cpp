#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <stdexcept>

#include "dwell/system.hpp"

using namespace dwell;

namespace {

ExampleParams heat_only() {
  // decoupled linear heat + scalar mode: B = D = 0, no jumps, no nonlinearity
  ExampleParams p;
  p.a = 1.0;
  p.c = 0.5;
  p.l = M_PI;
  p.alpha_poly = Poly({1.0});
  p.gamma_poly = Poly{};
  p.delta_jump = 0.0;
  return p;
}

HybridState sine_state(const FlowParams& fp, double amp, double y) {
  return HybridState{
      GridFunction::sample(
          [&](double z) { return amp * std::sin(M_PI * z / fp.l); }, fp.l,
          fp.n),
      y, 0.0};
}

// random low-mode trigonometric state, scaled to roughly unit size
HybridState random_smooth_state(const FlowParams& fp, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const double c1 = coef(rng), c2 = coef(rng), c3 = coef(rng);
  const double y = coef(rng);
  GridFunction x = GridFunction::sample(
      [&](double z) {
        const double u = M_PI * z / fp.l;
        return 0.6 * (c1 * std::sin(u) + 0.5 * c2 * std::sin(2.0 * u) +
                      0.25 * c3 * std::sin(3.0 * u));
      },
      fp.l, fp.n);
  return HybridState{std::move(x), y, 0.0};
}

}  // namespace

TEST_CASE("time profiles") {
  CHECK(TimeProfile::zero()(3.0) == 0.0);
  CHECK(TimeProfile::zero().sup() == 0.0);
  CHECK(TimeProfile::constant(-2.0)(1.0) == -2.0);
  CHECK(TimeProfile::constant(-2.0).sup() == 2.0);
  const auto sin1 = TimeProfile::sinusoid(0.3, 2.0, 0.5);
  CHECK(sin1(1.2) == doctest::Approx(0.3 * std::sin(2.0 * 1.2 + 0.5)));
  CHECK(sin1.sup() == doctest::Approx(0.3));
  CHECK(sin1.holder_continuous());

  const auto pw = TimeProfile::piecewise_constant(0.4, 0.25, 99);
  CHECK(!pw.holder_continuous());
  CHECK(pw.sup() == doctest::Approx(0.4));
  for (double t : {0.0, 0.1, 0.3, 1.7, 9.9}) {
    CHECK(std::abs(pw(t)) <= 0.4);
    CHECK(pw(t) == TimeProfile::piecewise_constant(0.4, 0.25, 99)(t));
  }
  CHECK(pw(0.1) == pw(0.2));   // same switching interval
  CHECK_THROWS_AS(TimeProfile::piecewise_constant(1.0, 0.0, 1),
                  std::invalid_argument);
}

TEST_CASE("disturbance sup-norm from parameters") {
  DisturbanceSignal d;
  CHECK(d.is_zero());
  CHECK(d.sup_norm(M_PI) == 0.0);
  d.d11_shape = Poly({0.0, M_PI, -1.0});  // z(pi - z)
  d.d11_profile = TimeProfile::sinusoid(0.2, 1.0, 0.0);
  CHECK(!d.is_zero());
  const double shape_h01 = h01_norm(d.d11_shape, M_PI);
  CHECK(d.sup_norm(M_PI) == doctest::Approx(0.2 * shape_h01).epsilon(1e-13));
  d.d12 = TimeProfile::constant(0.1);
  CHECK(d.sup_norm(M_PI) ==
        doctest::Approx(std::hypot(0.2 * shape_h01, 0.1)).epsilon(1e-13));
  DisturbanceSignal j;
  j.d22_amp = 0.3;
  j.jump_seed = 5;
  CHECK(j.sup_norm(M_PI) == doctest::Approx(0.3));
  CHECK(std::abs(j.d22_value(4)) <= 0.3);
  CHECK(j.d22_value(4) == j.d22_value(4));  // order-independent draws
  CHECK(j.d21_scale(4) == 0.0);
}

TEST_CASE("flow params validation") {
  const ExampleParams p = ExampleParams::reference();
  CHECK_THROWS_AS(FlowParams::make(p, 2, 1e-3, Scheme::ImexEuler),
                  std::invalid_argument);
  CHECK_THROWS_AS(FlowParams::make(p, 50, 0.0, Scheme::ImexEuler),
                  std::invalid_argument);
  // dt cap 0.1/c^2 = 0.4
  CHECK_THROWS_AS(FlowParams::make(p, 50, 0.5, Scheme::ImexEuler),
                  StepSizeError);
  const FlowParams fp = FlowParams::make(p, 50, 1e-3, Scheme::ImexEuler);
  CHECK(fp.h == doctest::Approx(M_PI / 51.0));
  CHECK(fp.alpha_nodes.size() == 52);
}

TEST_CASE("equilibrium is preserved exactly") {
  const ExampleParams p = ExampleParams::reference();
  for (Scheme sch : {Scheme::ImexEuler, Scheme::ImexCN}) {
    const FlowParams fp = FlowParams::make(p, 40, 1e-3, sch);
    HybridState s{GridFunction(p.l, 40), 0.0, 0.0};
    const DisturbanceSignal d;
    s = flow(s, fp, d, 0.25);
    CHECK(l2_norm(s.x) == 0.0);
    CHECK(s.y == 0.0);
    s = apply_jump(s, fp, Poly{}, 0.0);
    CHECK(l2_norm(s.x) == 0.0);
    CHECK(s.y == 0.0);
  }
}

TEST_CASE("heat eigenmode decay oracle") {
  ExampleParams p = heat_only();
  p.B_poly = Poly{};
  p.D_poly = Poly{};
  const double dt = 1e-3;
  const DisturbanceSignal d;
  for (Scheme sch : {Scheme::ImexEuler, Scheme::ImexCN}) {
    const FlowParams fp = FlowParams::make(p, 199, dt, sch);
    const HybridState s0 = sine_state(fp, 1.0, 0.0);
    const HybridState s1 = step_flow(s0, fp, d, dt);
    const double ratio = l2_norm(s1.x) / l2_norm(s0.x);
    // a^2 pi^2 / l^2 = 1
    CHECK(ratio == doctest::Approx(std::exp(-dt)).epsilon(1e-5));
  }
}

TEST_CASE("scalar exponential oracle") {
  ExampleParams p = heat_only();
  p.B_poly = Poly{};
  p.D_poly = Poly{};
  const double dt = 1e-3, c2 = 0.25;
  const DisturbanceSignal d;
  {
    const FlowParams fp = FlowParams::make(p, 40, dt, Scheme::ImexEuler);
    HybridState s{GridFunction(p.l, 40), 1.0, 0.0};
    const HybridState s1 = step_flow(s, fp, d, dt);
    CHECK(s1.y == doctest::Approx(std::exp(c2 * dt)).epsilon(1e-7));
    CHECK(l2_norm(s1.x) == 0.0);
    // multi-step growth
    const HybridState sT = flow(s, fp, d, 1.0);
    CHECK(sT.y == doctest::Approx(std::exp(c2)).epsilon(1e-3));
  }
  {
    const FlowParams fp = FlowParams::make(p, 40, dt, Scheme::ImexCN);
    HybridState s{GridFunction(p.l, 40), 1.0, 0.0};
    const HybridState s1 = step_flow(s, fp, d, dt);
    CHECK(s1.y == doctest::Approx(std::exp(c2 * dt)).epsilon(1e-11));
  }
}

TEST_CASE("flow identity, cocycle, and shift invariance") {
  const ExampleParams p = ExampleParams::reference();
  // dyadic dt keeps the step times exact, so on-grid splits are bit-exact
  const FlowParams fp = FlowParams::make(p, 60, 1.0 / 1024.0, Scheme::ImexEuler);
  DisturbanceSignal d;
  d.d11_shape = Poly({0.0, M_PI, -1.0});
  d.d11_profile = TimeProfile::sinusoid(0.05, 2.0, 0.3);
  const HybridState s0 = sine_state(fp, 1.0, 0.5);

  // (identity) flow to the current time
  const HybridState same = flow(s0, fp, d, 0.0);
  CHECK(same.y == s0.y);
  CHECK((same.x.values() - s0.x.values()).norm() == 0.0);

  // (cocycle) split at an on-grid time reproduces the direct run bit-exactly
  const HybridState mid = flow(s0, fp, d, 0.25);
  const HybridState split = flow(mid, fp, d, 0.75);
  const HybridState direct = flow(s0, fp, d, 0.75);
  CHECK(split.y == direct.y);
  CHECK((split.x.values() - direct.x.values()).cwiseAbs().maxCoeff() == 0.0);

  // (shift) restarting the clock with a phase-shifted profile reproduces the
  // run within roundoff
  const double shift = 0.375;
  DisturbanceSignal dshift = d;
  dshift.d11_profile = TimeProfile::sinusoid(0.05, 2.0, 0.3 + 2.0 * shift);
  HybridState s0b = s0;
  const HybridState a = flow(s0, fp, d, shift + 0.5);  // runs t in [shift, ..]
  HybridState b0{s0b.x, s0b.y, 0.0};
  // first advance the original to t = shift, then compare both branches
  const HybridState at_shift = flow(s0, fp, d, shift);
  HybridState bseed{at_shift.x, at_shift.y, 0.0};
  const HybridState b = flow(bseed, fp, dshift, 0.5);
  CHECK(b.y == doctest::Approx(a.y).epsilon(1e-12));
  CHECK((b.x.values() - a.x.values()).cwiseAbs().maxCoeff() <= 1e-12);
  (void)b0;
}

TEST_CASE("jump map") {
  const ExampleParams p = ExampleParams::reference();
  const FlowParams fp = FlowParams::make(p, 200, 1e-3, Scheme::ImexEuler);

  // x = 0, y = 1: x stays zero, y -> delta_jump * y
  HybridState s{GridFunction(p.l, 200), 1.0, 0.0};
  const HybridState js = apply_jump(s, fp, Poly{}, 0.0);
  CHECK(l2_norm(js.x) == 0.0);
  CHECK(js.y == doctest::Approx(0.25));
  CHECK(js.t == s.t);

  // x = sin z, y = 0: alpha = 1 keeps x, y+ = 0.05 * int sin = 0.1 + O(h^2)
  const HybridState s2 = sine_state(fp, 1.0, 0.0);
  const HybridState js2 = apply_jump(s2, fp, Poly{}, 0.0);
  CHECK((js2.x.values() - s2.x.values()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(js2.y == doctest::Approx(0.1).epsilon(1e-4));

  // zero jump map sends everything to the origin
  ExampleParams z = p;
  z.alpha_poly = Poly{};
  z.gamma_poly = Poly{};
  z.delta_jump = 0.0;
  const FlowParams fz = FlowParams::make(z, 200, 1e-3, Scheme::ImexEuler);
  const HybridState js3 = apply_jump(s2, fz, Poly{}, 0.0);
  CHECK(l2_norm(js3.x) == 0.0);
  CHECK(js3.y == 0.0);
}

TEST_CASE("V, W, U evaluators") {
  const ExampleParams p = ExampleParams::reference();
  const FlowParams fp = FlowParams::make(p, 199, 1e-3, Scheme::ImexEuler);
  HybridState origin{GridFunction(p.l, 199), 0.0, 0.0};
  CHECK(v_eval(origin) == 0.0);
  CHECK(w_eval(origin) == 0.0);
  CHECK(u_eval(origin) == 0.0);

  HybridState s = sine_state(fp, 1.0, 2.0);
  CHECK(v_eval(s) == doctest::Approx(M_PI / 2.0 + 4.0).epsilon(1e-4));
  CHECK(w_eval(s) == doctest::Approx(4.0 - M_PI / 2.0).epsilon(1e-4));
  CHECK(u_eval(s) == doctest::Approx(M_PI / 2.0 + 4.0).epsilon(1e-4));
  CHECK(state_norm(s) == doctest::Approx(std::sqrt(v_eval(s))));

  // sign of W tracks |y| vs the H01 norm
  CHECK(w_eval(sine_state(fp, 1.0, 1.3)) > 0);
  CHECK(w_eval(sine_state(fp, 1.0, 1.2)) < 0);
}

TEST_CASE("u_dot bound: scalar closed form and random states") {
  const ExampleParams p = ExampleParams::reference();
  const FlowParams fp = FlowParams::make(p, 100, 1e-4, Scheme::ImexEuler);
  const Sym2 at = build_Atilde0(p);
  const DisturbanceSignal d;

  // scalar state: dU/dt = 2 c^2 y^2 exactly (d = 0)
  HybridState s{GridFunction(p.l, 100), 0.7, 0.0};
  const double probe = 1e-7;
  const HybridState s1 = step_flow(s, fp, d, probe);
  const HybridState s2 = step_flow(s1, fp, d, probe);
  const double udot =
      (-3.0 * u_eval(s) + 4.0 * u_eval(s1) - u_eval(s2)) / (2.0 * probe);
  CHECK(udot == doctest::Approx(2.0 * 0.25 * 0.49).epsilon(1e-8));

  // origin: both sides vanish
  HybridState o{GridFunction(p.l, 100), 0.0, 0.0};
  CHECK(u_dot_residual(o, fp, d, at, 0.1) == doctest::Approx(0.0));

  // random smooth states: residual stays below 1e-3 (the eps slack dominates)
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const HybridState rs = random_smooth_state(fp, rng);
    CHECK(u_dot_residual(rs, fp, d, at, 0.1) <= 1e-3);
  }
}

TEST_CASE("jump estimate along random states") {
  const ExampleParams p = ExampleParams::reference();
  const int n = 150;
  const FlowParams fp = FlowParams::make(p, n, 1e-3, Scheme::ImexEuler);
  const Sym2 b0 = build_B0(p);
  const Sym2 b1 = build_B1(p);
  const double eps = 0.1;
  const double kap = kappa_eps(p, eps);
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> mu2(-0.2, 0.2);
  int violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const HybridState s = random_smooth_state(fp, rng);
    const Poly d21 = mu2(rng) * Poly({0.0, fp.l, -1.0});
    const double d22 = mu2(rng);
    const HybridState js = apply_jump(s, fp, d21, d22);
    const double hx = h01_norm(s.x), ay = std::abs(s.y);
    const double rhs = (b0.a11 + eps * b1.a11) * hx * hx +
                       2.0 * b0.a12 * hx * ay +
                       (b0.a22 + eps * b1.a22) * ay * ay +
                       kap * (std::pow(h01_norm(d21, fp.l), 2) + d22 * d22);
    if (v_eval(js) > rhs) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("Chetaev derivative is positive on the W = 0 boundary") {
  const ExampleParams p = ExampleParams::reference();
  const FlowParams fp = FlowParams::make(p, 100, 1e-4, Scheme::ImexEuler);
  const DisturbanceSignal d;
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 1000; ++trial) {
    HybridState s = random_smooth_state(fp, rng);
    const double hx = h01_norm(s.x);
    if (hx < 1e-6) continue;
    s.y = (trial % 2 ? 1.0 : -1.0) * hx;  // exactly on the boundary
    CHECK(std::abs(w_eval(s)) <= 1e-12 * v_eval(s));
    CHECK(w_dot_probe(s, fp, d, 1e-7) > 0.0);
  }
}

TEST_CASE("monotone damping of the decoupled heat flow") {
  ExampleParams p = heat_only();
  p.B_poly = Poly{};
  p.D_poly = Poly{};
  p.kappa3 = 1.0;
  const FlowParams fp = FlowParams::make(p, 100, 1e-3, Scheme::ImexEuler);
  const DisturbanceSignal d;
  HybridState s = sine_state(fp, 2.0, 0.0);
  double prev = v_eval(s);
  for (int i = 0; i < 200; ++i) {
    s = step_flow(s, fp, d, fp.dt);
    const double cur = v_eval(s);
    CHECK(cur <= prev + 1e-14);
    prev = cur;
  }
}

TEST_CASE("jump operator spectral radius") {
  const ExampleParams p = ExampleParams::reference();
  CHECK(jump_spectral_radius(p, 50) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(jump_spectral_radius(p, 200) == doctest::Approx(1.0).epsilon(1e-8));

  // decoupled scalar jump
  ExampleParams q = p;
  q.alpha_poly = Poly{};
  q.gamma_poly = Poly{};
  q.delta_jump = 0.25;
  CHECK(jump_spectral_radius(q, 60) == doctest::Approx(0.25).epsilon(1e-9));

  // diagonal scaling dominates
  ExampleParams r = p;
  r.alpha_poly = Poly({2.0});
  CHECK(jump_spectral_radius(r, 60) == doctest::Approx(2.0).epsilon(1e-8));

  // dense oracle at n = 16
  const int n = 16;
  const FlowParams fp = FlowParams::make(p, n, 1e-3, Scheme::ImexEuler);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int i = 1; i <= n; ++i) {
    J(i - 1, i - 1) = fp.alpha_nodes[i];
    J(i - 1, n) = fp.beta_nodes[i];
    J(n, i - 1) = fp.h * fp.gamma_nodes[i];
  }
  J(n, n) = fp.delta_jump;
  const auto lam = Eigen::EigenSolver<Eigen::MatrixXd>(J, false).eigenvalues();
  CHECK(lam.cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(jump_spectral_radius(p, n) ==
        doctest::Approx(lam.cwiseAbs().maxCoeff()).epsilon(1e-9));
}

TEST_CASE("self-convergence of the two schemes (smoke)") {
  const ExampleParams p = ExampleParams::reference();
  const DisturbanceSignal d;
  for (auto [sch, nominal] :
       {std::pair{Scheme::ImexEuler, 1.0}, {Scheme::ImexCN, 2.0}}) {
    auto terminal = [&](double dt) {
      const FlowParams fp = FlowParams::make(p, 60, dt, sch);
      const HybridState s0 = sine_state(fp, 1.0, 1.0);
      return flow(s0, fp, d, 0.5);
    };
    auto err = [&](double dt) {
      const HybridState a = terminal(dt);
      const HybridState ref = terminal(dt / 16.0);
      const GridFunction diff(a.x.l(),
                              (a.x.values() - ref.x.values()).eval());
      return std::hypot(h01_norm(diff), a.y - ref.y);
    };
    const double e1 = err(4e-3), e2 = err(2e-3);
    const double order = std::log2(e1 / e2);
    CHECK(order == doctest::Approx(nominal).epsilon(0.2));
  }
}
