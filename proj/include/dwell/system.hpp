#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>

#include "dwell/certificate.hpp"
#include "dwell/grid.hpp"
#include "dwell/params.hpp"

namespace dwell {

struct HybridState {
  GridFunction x;
  double y = 0;
  double t = 0;
};

double v_eval(const HybridState& s);  // ||x||_{H01}^2 + y^2
double w_eval(const HybridState& s);  // y^2 - ||x||_{H01}^2
double u_eval(const HybridState& s);  // ||x||_{L2}^2 + y^2
double state_norm(const HybridState& s);  // sqrt(v_eval)

/// Scalar time profile for disturbance components. The piecewise-constant
/// kind redraws a uniform value in [-amp, amp] every `period` seconds from a
/// per-interval hash of the seed, so evaluation is order-independent.
class TimeProfile {
 public:
  static TimeProfile zero();
  static TimeProfile constant(double value);
  static TimeProfile sinusoid(double amplitude, double omega, double phase);
  static TimeProfile piecewise_constant(double amplitude, double period,
                                        std::uint64_t seed);

  double operator()(double t) const;
  double sup() const;
  bool is_zero() const { return kind_ == Kind::Zero; }
  bool holder_continuous() const { return kind_ != Kind::Piecewise; }

 private:
  enum class Kind { Zero, Constant, Sinusoid, Piecewise };
  Kind kind_ = Kind::Zero;
  double a_ = 0, b_ = 0, c_ = 0;
  std::uint64_t seed_ = 0;
};

/// Disturbance pair: d1(t) = (d11_shape * d11_profile(t), d12(t)) acting on
/// the flow, and per-jump d2(k) = (d21_shape * u_k, d22 v_k) with u_k, v_k
/// seeded uniform draws in [-1, 1] scaled by the amplitudes.
struct DisturbanceSignal {
  Poly d11_shape;           // vanishes at z = 0, l
  TimeProfile d11_profile = TimeProfile::zero();
  TimeProfile d12 = TimeProfile::zero();

  Poly d21_shape;           // vanishes at z = 0, l
  double d21_amp = 0;
  double d22_amp = 0;
  std::uint64_t jump_seed = 0;

  double d21_scale(long k) const;  // in [-d21_amp, d21_amp]
  double d22_value(long k) const;  // in [-d22_amp, d22_amp]

  /// d = max(sup_t ||d1(t)||_{U1}, sup_k ||d2(k)||_{U2}) from the profile
  /// parameters (amplitude bounds for the seeded kinds), never from samples.
  double sup_norm(double l) const;

  bool is_zero() const;
};

enum class Scheme { ImexEuler, ImexCN };

struct StepSizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Grid-sampled plant data for the time stepper. Diffusion is implicit
/// (tridiagonal solve), everything else explicit; dt <= 0.1 / max(c^2,
/// |Phi'|) is enforced for the explicit part (|Phi'| against the running
/// state inside step_flow).
struct FlowParams {
  int n = 0;
  double l = 0, h = 0;
  double a2 = 0, c2 = 0;
  Eigen::VectorXd B_nodes, D_nodes, alpha_nodes, beta_nodes, gamma_nodes;
  double kappa1 = 0, kappa3 = 0;
  double delta_jump = 0;
  double dt = 0;
  Scheme scheme = Scheme::ImexEuler;

  static FlowParams make(const ExampleParams& p, int n_interior, double dt,
                         Scheme scheme);
};

/// One IMEX step of length dt from s.t. ImexEuler: backward Euler on a^2
/// x_zz, forward Euler on the rest. ImexCN: Crank-Nicolson on diffusion with
/// an explicit trapezoidal (predictor-corrector) treatment of the rest.
HybridState step_flow(const HybridState& s, const FlowParams& p,
                      const DisturbanceSignal& d, double dt);

/// Repeated step_flow with the final step shortened to land exactly on
/// t_target; identity when t_target == s.t.
HybridState flow(const HybridState& s, const FlowParams& p,
                 const DisturbanceSignal& d, double t_target);

/// Jump map: x_i^+ = alpha_i x_i + beta_i y + d21(z_i),
/// y^+ = trapz(gamma x) + delta_jump y + d22. Time unchanged.
HybridState apply_jump(const HybridState& s, const FlowParams& p,
                       const Poly& d21, double d22);

/// One-sided second-order finite-difference estimate of dU/dt along the
/// discrete flow minus the quadratic bound zeta^T (Atilde0 + eps I) zeta +
/// (1/eps) ||d1(t)||^2, zeta = (||x||_{L2}, |y|). Nonpositive up to
/// discretization error when the bound holds.
double u_dot_residual(const HybridState& s, const FlowParams& p,
                      const DisturbanceSignal& d, const Sym2& atilde0,
                      double eps, double dt_probe = 1e-6);

/// Same probe for dW/dt: returns the finite-difference derivative of W.
double w_dot_probe(const HybridState& s, const FlowParams& p,
                   const DisturbanceSignal& d, double dt_probe = 1e-6);

struct PowerIterationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Spectral radius of the discretized jump operator
/// (x, y) -> (alpha x + beta y, trapz(gamma x) + delta_jump y)
/// by power iteration (squared-operator retry, dense fallback), converged to
/// 1e-10; throws PowerIterationError after 1e5 iterations without progress.
double jump_spectral_radius(const ExampleParams& p, int n_interior);

}  // namespace dwell
