#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dwell/params.hpp"
#include "dwell/rates.hpp"

namespace dwell {

/// Symmetric 2x2 matrix.
struct Sym2 {
  double a11 = 0, a12 = 0, a22 = 0;
  Eigen::Matrix2d matrix() const;
  double spectral_norm() const;
};

struct EigSym2 {
  double lam_min = 0;
  double lam_max = 0;
  Eigen::Vector2d evec_max{1, 0};  // unit norm, first nonzero component > 0
};

/// Closed-form symmetric 2x2 eigendecomposition.
EigSym2 eig_sym2(const Sym2& m);

enum class CaseLabel { a, b, infeasible };
std::string to_string(CaseLabel c);

struct Gate {
  std::string name;
  double value = 0;  // positive means satisfied (slack)
  bool pass = false;
};

struct EmptyWindowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Certificate matrices. A0 bounds the flow estimate of V, B0/B1 the jump
// estimate, Atilde0 the L2-level estimate of U.
Sym2 build_A0(const ExampleParams& p);
Sym2 build_B0(const ExampleParams& p);
Sym2 build_B1(const ExampleParams& p);
Sym2 build_Atilde0(const ExampleParams& p);
double kappa_eps(const ExampleParams& p, double eps);

/// sigma = b11 + 2 b12 + b22 of B0 (worst jump growth on the |y| = ||x||
/// cone); vartheta = pi^2 a^2/l^2 - ||B||_{H01} - (l/pi)||D||_{L2} - c^2.
std::pair<double, double> build_sigma_vartheta(const ExampleParams& p);

/// Open admissible interval per case, lower endpoint clamped at 0:
///   case a: ((1/vartheta) ln(sigma/2), -(1/lam_max(A0)) ln lam_max(B0))
///   case b: ((1/vartheta) ln lam_max(B0), (1/lam_max(A0)) ln(2/sigma))
/// Throws EmptyWindowError when lower >= upper. The margin field is filled
/// by the caller (it depends on the epsilon-perturbed rates).
DwellWindow dwell_window(CaseLabel label, double sigma, double vartheta,
                         double lam_max_A0, double lam_max_B0);

/// Linear rates induced by the certificate at a given epsilon:
///   phi1 = (vartheta - eps) s, phi2 = (lam_max(A0) + 2 eps) s,
///   psi1/psi2 per case from sigma/2 and lam_max(B0) shifted by
///   eps (1 + ||B1||), chi = max(sqrt(2)/eps, sqrt(kappa(eps)/eps)) s.
RateSet induced_rates(CaseLabel label, double sigma, double vartheta,
                      double lam_max_A0, double lam_max_B0, double norm_B1,
                      double kappa, double eps);

/// Closed-form admissible interval for the epsilon-perturbed linear rates:
/// (ln k1 / c1, -ln k2 / c2). Degenerates to the dwell_window endpoints as
/// eps -> 0.
std::pair<double, double> rate_window(const RateSet& rates);

/// Margin delta for a schedule whose gaps lie in [theta1, theta2]:
/// half the distance from [theta1, theta2] to the rate_window boundary,
/// nonpositive when the schedule is not admissible for these rates.
double margin_for_window(const RateSet& rates, double theta1, double theta2);

struct A3A4Report {
  bool pass = false;
  double slack_a3 = 0;  // (theta1 - delta) - sup_a \int_a^{psi1(a)} ds/phi1
  double slack_a4 = 0;  // inf_a \int_{psi2(a)}^a ds/phi2 - (theta2 + delta)
  double worst_slack = 0;
  double witness_a = 1;  // grid point attaining the worst slack (non-linear)
};

/// Dwell conditions for the window (theta1, theta2, margin). Closed forms
/// for linear rates (a-independent); geometric grid a in [1e-6, 1e6] for
/// tabulated/power rates.
A3A4Report check_A3_A4(const RateSet& rates, const DwellWindow& window);

/// Flow and jump growth bounds: ||phi_c(t,0,x,d1)|| <= xi_tau(||x||) +
/// eta_tau(||d1||) for t in [0,tau], and ||g(x,d2)|| <= xi(||x||) +
/// eta(||d2||), all linear.
struct AssumptionBounds {
  RateFunction xi_tau;
  RateFunction eta_tau;
  RateFunction xi;
  RateFunction eta;
  double tau = 0;
};
AssumptionBounds assumption1_bounds(const ExampleParams& p, double eps,
                                    double tau);

/// Slopes behind assumption1_bounds: xi = e^{(lam+eps) tau / 2} and
/// eta = sqrt((e^{(lam+eps) tau} - 1) / (eps (lam+eps))), with the m -> 0
/// limit handled; eta stays bounded as tau grows when lam + eps < 0.
std::pair<double, double> flow_bound_slopes(double lam, double eps,
                                            double tau);

/// Reach bound R(s, q) = max{R1, R4, R6, s} with
///   R1 = xi_tau(s) + eta_tau(q),          R2 = xi(s) + eta(q),
///   R3 = max{xi(R1) + eta(q), R2},        R4 = xi_tau(R3) + eta_tau(q),
///   R5 = (alpha1^{-1} o alpha2)(R3),      R6 = xi_tau(R5) + eta_tau(q).
double reach_bound_R(const AssumptionBounds& bounds,
                     const RateFunction& alpha1, const RateFunction& alpha2,
                     double s, double q);

struct CertificateReport {
  Sym2 A0, B0, B1, Atilde0;
  double sigma = 0, vartheta = 0;
  double lam_max_A0 = 0, lam_max_B0 = 0;
  Eigen::Vector2d evec_A0{1, 0}, evec_B0{1, 0};
  double form_A0 = 0, form_B0 = 0;  // v^T diag{-1,1} v of the top eigenvectors
  CaseLabel case_label = CaseLabel::infeasible;
  std::optional<DwellWindow> window;         // endpoints at eps -> 0
  std::pair<double, double> window_eps{0, 0};  // rate_window at this epsilon
  double epsilon = 0;
  double kappa = 0;
  double norm_B1 = 0;
  double chi_slope = 0;
  std::optional<RateSet> rates;
  std::vector<Gate> gates;

  bool feasible() const {
    return case_label != CaseLabel::infeasible && window.has_value();
  }
};

/// Default epsilon: 1/100 of the smallest positive gate slack.
double select_epsilon(const ExampleParams& p);

/// Full certificate pipeline: matrices, eigenpairs, gates, case, window,
/// induced rates. Infeasible inputs yield a report naming the failed gate,
/// never an exception.
CertificateReport build_certificate(const ExampleParams& p);

}  // namespace dwell
