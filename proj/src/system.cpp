#include "dwell/system.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

namespace dwell {

double v_eval(const HybridState& s) {
  const double hx = h01_norm(s.x);
  return hx * hx + s.y * s.y;
}

double w_eval(const HybridState& s) {
  const double hx = h01_norm(s.x);
  return s.y * s.y - hx * hx;
}

double u_eval(const HybridState& s) {
  const double lx = l2_norm(s.x);
  return lx * lx + s.y * s.y;
}

double state_norm(const HybridState& s) { return std::sqrt(v_eval(s)); }

// --- TimeProfile ------------------------------------------------------

TimeProfile TimeProfile::zero() { return TimeProfile{}; }

TimeProfile TimeProfile::constant(double value) {
  TimeProfile p;
  p.kind_ = Kind::Constant;
  p.a_ = value;
  return p;
}

TimeProfile TimeProfile::sinusoid(double amplitude, double omega,
                                  double phase) {
  TimeProfile p;
  p.kind_ = Kind::Sinusoid;
  p.a_ = amplitude;
  p.b_ = omega;
  p.c_ = phase;
  return p;
}

TimeProfile TimeProfile::piecewise_constant(double amplitude, double period,
                                            std::uint64_t seed) {
  if (!(period > 0))
    throw std::invalid_argument("TimeProfile: switch period must be > 0");
  TimeProfile p;
  p.kind_ = Kind::Piecewise;
  p.a_ = amplitude;
  p.b_ = period;
  p.seed_ = seed;
  return p;
}

namespace {

// splitmix64: order-independent per-index draws
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double unit_draw(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t h = mix(seed ^ mix(index));
  return 2.0 * (double(h >> 11) * 0x1.0p-53) - 1.0;  // in [-1, 1)
}

}  // namespace

double TimeProfile::operator()(double t) const {
  switch (kind_) {
    case Kind::Zero: return 0;
    case Kind::Constant: return a_;
    case Kind::Sinusoid: return a_ * std::sin(b_ * t + c_);
    case Kind::Piecewise: {
      const auto idx = std::uint64_t(std::max(0.0, std::floor(t / b_)));
      return a_ * unit_draw(seed_, idx);
    }
  }
  return 0;
}

double TimeProfile::sup() const {
  switch (kind_) {
    case Kind::Zero: return 0;
    case Kind::Constant: return std::abs(a_);
    case Kind::Sinusoid: return std::abs(a_);
    case Kind::Piecewise: return std::abs(a_);
  }
  return 0;
}

// --- DisturbanceSignal ------------------------------------------------

double DisturbanceSignal::d21_scale(long k) const {
  if (d21_amp == 0) return 0;
  return d21_amp * unit_draw(mix(jump_seed ^ 0x5851f42d4c957f2dULL),
                             std::uint64_t(k));
}

double DisturbanceSignal::d22_value(long k) const {
  if (d22_amp == 0) return 0;
  return d22_amp * unit_draw(mix(jump_seed ^ 0x14057b7ef767814fULL),
                             std::uint64_t(k));
}

double DisturbanceSignal::sup_norm(double l) const {
  // ||d1(t)||_{U1}^2 = ||shape||_{H01}^2 p1(t)^2 + p2(t)^2. The amplitude
  // bounds give sup_t exactly when one component vanishes and an upper
  // bound (attained up to phase alignment) otherwise; thresholds stay sound.
  const double s1 = h01_norm(d11_shape, l) * d11_profile.sup();
  const double s2 = d12.sup();
  const double d1 = std::sqrt(s1 * s1 + s2 * s2);
  const double j1 = h01_norm(d21_shape, l) * d21_amp;
  const double d2 = std::sqrt(j1 * j1 + d22_amp * d22_amp);
  return std::max(d1, d2);
}

bool DisturbanceSignal::is_zero() const {
  return d11_profile.is_zero() && d12.is_zero() && d21_amp == 0 &&
         d22_amp == 0;
}

// --- FlowParams -------------------------------------------------------

FlowParams FlowParams::make(const ExampleParams& p, int n_interior, double dt,
                            Scheme scheme) {
  p.validate();
  if (n_interior < 3)
    throw std::invalid_argument("FlowParams: grid n must be >= 3");
  if (!(dt > 0)) throw std::invalid_argument("FlowParams: dt must be > 0");
  FlowParams fp;
  fp.n = n_interior;
  fp.l = p.l;
  fp.h = p.l / double(n_interior + 1);
  fp.a2 = p.a * p.a;
  fp.c2 = p.c * p.c;
  fp.kappa1 = p.kappa1;
  fp.kappa3 = p.kappa3;
  fp.delta_jump = p.delta_jump;
  fp.dt = dt;
  fp.scheme = scheme;
  if (dt > 0.1 / fp.c2)
    throw StepSizeError("FlowParams: dt exceeds 0.1/c^2 = " +
                        std::to_string(0.1 / fp.c2));
  const int m = n_interior + 2;
  fp.B_nodes.resize(m);
  fp.D_nodes.resize(m);
  fp.alpha_nodes.resize(m);
  fp.beta_nodes.resize(m);
  fp.gamma_nodes.resize(m);
  for (int i = 0; i < m; ++i) {
    const double z = fp.h * double(i);
    fp.B_nodes[i] = p.B_poly(z);
    fp.D_nodes[i] = p.D_poly(z);
    fp.alpha_nodes[i] = p.alpha_poly(z);
    fp.beta_nodes[i] = p.beta_poly(z);
    fp.gamma_nodes[i] = p.gamma_poly(z);
  }
  return fp;
}

namespace {

// Thomas solve of (I - w T) u = rhs with T the second-difference stencil
// (1, -2, 1)/h^2 on the interior nodes.
void solve_diffusion(double w_over_h2, Eigen::VectorXd& rhs) {
  const int n = int(rhs.size());
  const double diag = 1.0 + 2.0 * w_over_h2;
  const double off = -w_over_h2;
  static thread_local std::vector<double> scratch;
  scratch.resize(n);
  double beta = diag;
  rhs[0] /= beta;
  for (int i = 1; i < n; ++i) {
    scratch[i] = off / beta;
    beta = diag - off * scratch[i];
    rhs[i] = (rhs[i] - off * rhs[i - 1]) / beta;
  }
  for (int i = n - 2; i >= 0; --i) rhs[i] -= scratch[i + 1] * rhs[i + 1];
}

struct ExplicitRhs {
  Eigen::VectorXd fx;  // interior
  double fy;
};

double phi_nl(double s, const FlowParams& p) {
  return -p.kappa1 * s - p.kappa3 * s * s * s;
}

ExplicitRhs explicit_rhs(const Eigen::VectorXd& values, double y, double t,
                         const FlowParams& p, const DisturbanceSignal& d) {
  const int n = p.n;
  ExplicitRhs out;
  out.fx.resize(n);
  const double p11 = d.d11_profile(t);
  for (int i = 1; i <= n; ++i) {
    double f = phi_nl(values[i], p) + p.B_nodes[i] * y;
    if (p11 != 0) f += d.d11_shape(p.h * double(i)) * p11;
    out.fx[i - 1] = f;
  }
  double coupling = 0.5 * (p.D_nodes[0] * values[0] +
                           p.D_nodes[n + 1] * values[n + 1]);
  for (int i = 1; i <= n; ++i) coupling += p.D_nodes[i] * values[i];
  coupling *= p.h;
  out.fy = p.c2 * y + coupling + d.d12(t);
  return out;
}

void enforce_explicit_cap(const Eigen::VectorXd& values, const FlowParams& p,
                          double dt) {
  double m = 0;
  for (int i = 1; i <= p.n; ++i) m = std::max(m, std::abs(values[i]));
  const double dphi = p.kappa1 + 3.0 * p.kappa3 * m * m;
  const double cap = 0.1 / std::max(p.c2, dphi);
  if (dt > cap)
    throw StepSizeError("step_flow: dt " + std::to_string(dt) +
                        " exceeds explicit cap " + std::to_string(cap));
}

Eigen::VectorXd laplacian_interior(const Eigen::VectorXd& values, double h) {
  const int n = int(values.size()) - 2;
  Eigen::VectorXd out(n);
  for (int i = 1; i <= n; ++i)
    out[i - 1] = (values[i - 1] - 2.0 * values[i] + values[i + 1]) / (h * h);
  return out;
}

}  // namespace

HybridState step_flow(const HybridState& s, const FlowParams& p,
                      const DisturbanceSignal& d, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("step_flow: dt must be > 0");
  const Eigen::VectorXd& v = s.x.values();
  const int n = p.n;
  if (s.x.n() != n) throw std::invalid_argument("step_flow: grid mismatch");
  enforce_explicit_cap(v, p, dt);

  Eigen::VectorXd xnew(n + 2);
  xnew[0] = 0;
  xnew[n + 1] = 0;
  double ynew;

  if (p.scheme == Scheme::ImexEuler) {
    const ExplicitRhs g = explicit_rhs(v, s.y, s.t, p, d);
    Eigen::VectorXd rhs = v.segment(1, n) + dt * g.fx;
    solve_diffusion(dt * p.a2 / (p.h * p.h), rhs);
    xnew.segment(1, n) = rhs;
    ynew = s.y + dt * g.fy;
  } else {
    // Predictor: one IMEX-Euler step to t+dt.
    const ExplicitRhs g0 = explicit_rhs(v, s.y, s.t, p, d);
    Eigen::VectorXd xp(n + 2);
    xp[0] = 0;
    xp[n + 1] = 0;
    {
      Eigen::VectorXd rhs = v.segment(1, n) + dt * g0.fx;
      solve_diffusion(dt * p.a2 / (p.h * p.h), rhs);
      xp.segment(1, n) = rhs;
    }
    const double yp = s.y + dt * g0.fy;
    // Corrector: Crank-Nicolson diffusion + trapezoidal explicit part.
    const ExplicitRhs g1 = explicit_rhs(xp, yp, s.t + dt, p, d);
    Eigen::VectorXd rhs = v.segment(1, n) +
                          0.5 * dt * p.a2 * laplacian_interior(v, p.h) +
                          0.5 * dt * (g0.fx + g1.fx);
    solve_diffusion(0.5 * dt * p.a2 / (p.h * p.h), rhs);
    xnew.segment(1, n) = rhs;
    ynew = s.y + 0.5 * dt * (g0.fy + g1.fy);
  }

  HybridState out{GridFunction(p.l, std::move(xnew)), ynew, s.t + dt};
  return out;
}

HybridState flow(const HybridState& s, const FlowParams& p,
                 const DisturbanceSignal& d, double t_target) {
  if (t_target < s.t - 1e-12)
    throw std::invalid_argument("flow: t_target before current time");
  if (t_target <= s.t) return s;
  HybridState cur = s;
  const double t0 = s.t;
  const double snap = 1e-13 * std::max(1.0, std::abs(t_target));
  // canonical step times t0 + k dt: splitting at a step boundary reproduces
  // the same time sequence
  for (long k = 0; cur.t < t_target - snap; ++k) {
    const double t_next = std::min(t0 + double(k + 1) * p.dt, t_target);
    if (t_next <= cur.t) continue;
    cur = step_flow(cur, p, d, t_next - cur.t);
    cur.t = t_next;
  }
  cur.t = t_target;  // land exactly
  return cur;
}

HybridState apply_jump(const HybridState& s, const FlowParams& p,
                       const Poly& d21, double d22) {
  const Eigen::VectorXd& v = s.x.values();
  const int n = p.n;
  if (s.x.n() != n) throw std::invalid_argument("apply_jump: grid mismatch");
  Eigen::VectorXd xnew(n + 2);
  for (int i = 0; i <= n + 1; ++i) {
    double val = p.alpha_nodes[i] * v[i] + p.beta_nodes[i] * s.y;
    if (!d21.is_zero()) val += d21(p.h * double(i));
    xnew[i] = val;
  }
  // beta and d21 vanish at the ends, so the Dirichlet values stay zero.
  xnew[0] = 0;
  xnew[n + 1] = 0;
  double coupling = 0.5 * (p.gamma_nodes[0] * v[0] +
                           p.gamma_nodes[n + 1] * v[n + 1]);
  for (int i = 1; i <= n; ++i) coupling += p.gamma_nodes[i] * v[i];
  coupling *= p.h;
  const double ynew = coupling + p.delta_jump * s.y + d22;
  return HybridState{GridFunction(p.l, std::move(xnew)), ynew, s.t};
}

double u_dot_residual(const HybridState& s, const FlowParams& p,
                      const DisturbanceSignal& d, const Sym2& atilde0,
                      double eps, double dt_probe) {
  if (!(eps > 0))
    throw std::invalid_argument("u_dot_residual: eps must be > 0");
  // Second-order one-sided difference (the Lie derivative is a right limit).
  const HybridState s1 = step_flow(s, p, d, dt_probe);
  const HybridState s2 = step_flow(s1, p, d, dt_probe);
  const double u0 = u_eval(s), u1 = u_eval(s1), u2 = u_eval(s2);
  const double udot = (-3.0 * u0 + 4.0 * u1 - u2) / (2.0 * dt_probe);
  const double lx = l2_norm(s.x);
  const double ay = std::abs(s.y);
  const double quad = (atilde0.a11 + eps) * lx * lx +
                      2.0 * atilde0.a12 * lx * ay +
                      (atilde0.a22 + eps) * ay * ay;
  const double sh = h01_norm(d.d11_shape, p.l) * d.d11_profile(s.t);
  const double p2 = d.d12(s.t);
  const double xi_sq = sh * sh + p2 * p2;
  return udot - (quad + xi_sq / eps);
}

double w_dot_probe(const HybridState& s, const FlowParams& p,
                   const DisturbanceSignal& d, double dt_probe) {
  const HybridState s1 = step_flow(s, p, d, dt_probe);
  const HybridState s2 = step_flow(s1, p, d, dt_probe);
  return (-3.0 * w_eval(s) + 4.0 * w_eval(s1) - w_eval(s2)) / (2.0 * dt_probe);
}

double jump_spectral_radius(const ExampleParams& p, int n_interior) {
  const FlowParams fp =
      FlowParams::make(p, n_interior, 1e-3, Scheme::ImexEuler);
  const int n = fp.n;
  const int dim = n + 1;  // interior x values plus y
  auto apply = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(dim);
    const double y = v[n];
    double coupling = 0;
    for (int i = 1; i <= n; ++i)
      coupling += fp.gamma_nodes[i] * v[i - 1];
    coupling *= fp.h;
    for (int i = 1; i <= n; ++i)
      out[i - 1] = fp.alpha_nodes[i] * v[i - 1] + fp.beta_nodes[i] * y;
    out[n] = coupling + fp.delta_jump * y;
    return out;
  };

  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = unit_draw(0x9d3f, std::uint64_t(i));
  double nv = v.norm();
  if (nv == 0) v.setConstant(1.0);
  v /= v.norm();
  double est = 0, prev = -1;
  const int kMaxIter = 100000;
  for (int it = 0; it < kMaxIter; ++it) {
    Eigen::VectorXd w = apply(v);
    const double nw = w.norm();
    if (nw == 0) return 0;  // nilpotent direction; radius of the zero map
    est = nw;
    v = w / nw;
    if (it > 4 && std::abs(est - prev) <= 1e-10 * std::max(1.0, est))
      return est;
    prev = est;
  }
  // Oscillation (e.g. dominant +/- pair): retry on the squared operator.
  prev = -1;
  for (int it = 0; it < kMaxIter; ++it) {
    Eigen::VectorXd w = apply(apply(v));
    const double nw = w.norm();
    if (nw == 0) return 0;
    est = std::sqrt(nw);
    v = w / nw;
    if (it > 4 && std::abs(est - prev) <= 1e-10 * std::max(1.0, est))
      return est;
    prev = est;
  }
  if (dim <= 2048) {
    // Dense fallback.
    Eigen::MatrixXd J(dim, dim);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    for (int j = 0; j < dim; ++j) {
      e[j] = 1.0;
      J.col(j) = apply(e);
      e[j] = 0.0;
    }
    const Eigen::VectorXcd lam = Eigen::EigenSolver<Eigen::MatrixXd>(J, false)
                                     .eigenvalues();
    return lam.cwiseAbs().maxCoeff();
  }
  throw PowerIterationError(
      "jump_spectral_radius: no convergence after 1e5 iterations");
}

}  // namespace dwell
