#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dwell/rates.hpp"
#include "dwell/system.hpp"

namespace dwell {

/// Strictly increasing jump times within [0, horizon].
struct Schedule {
  std::vector<double> taus;
  double horizon = 0;
  std::optional<std::pair<double, double>> gap_range;  // declared window
  bool window_admissible = true;  // gaps within the declared window

  /// tau_k = tau0 + k T up to the horizon (inclusive); tau0 defaults to T.
  static Schedule uniform(double T, double horizon,
                          std::optional<double> tau0 = std::nullopt);
  /// Gaps drawn uniformly from [theta1, theta2]; first jump after one gap.
  static Schedule random(std::uint64_t seed, double theta1, double theta2,
                         double horizon);
  /// User-supplied times; flagged non-admissible when a declared window is
  /// violated, but still usable.
  static Schedule explicit_list(std::vector<double> taus, double horizon,
                                std::optional<std::pair<double, double>> window
                                = std::nullopt);

  double min_gap() const;
  double max_gap() const;
};

struct SamplePoint {
  double t = 0;
  double y = 0;
  double l2_x = 0, h01_x = 0;
  double V = 0, W = 0, U = 0;
  bool gplus = false;   // W >= 0
  long jump_index = -1;  // >= 0 on the one-sided rows at a jump
};

struct JumpRecord {
  long k = -1;
  double tau = 0;
  double V_before = 0, V_after = 0;
  double norm_before = 0, norm_after = 0;
  bool gplus_before = false, gplus_after = false;
};

struct TrajectoryRecord {
  std::vector<SamplePoint> samples;  // increasing t; only jump rows share t
  std::vector<JumpRecord> jumps;
  std::optional<HybridState> final_state;  // for split-and-restart runs
  double d_sup = 0;
  // run snapshot
  int n = 0;
  double l = 0;
  double dt = 0, sample_dt = 0, horizon = 0;
  Scheme scheme = Scheme::ImexEuler;

  double grid_h() const { return l / double(n + 1); }
};

/// Alternates flow segments and jumps per the schedule; records samples on
/// the sample_dt grid plus both one-sided values at each jump time.
TrajectoryRecord run_trajectory(const FlowParams& p, const HybridState& s0,
                                const Schedule& sched,
                                const DisturbanceSignal& d, double sample_dt,
                                double horizon);

struct CheckReport {
  std::string name;
  bool pass = true;
  bool vacuous = false;
  double worst_slack = 0;
  double tol = 0;
  long checks = 0;
  std::string detail;
};

/// Per-jump contraction: on every maximal jump range [p, m] whose segments
/// stay above the norm threshold r, F(v(tau_l^+), v(tau_p^+)) >= margin*(l-p)
/// - tol for all p <= l <= m. tol = 10 (dt + h^2) Lip(V) from the record.
CheckReport verify_jump_contraction(const TrajectoryRecord& rec, const RateSet& rates,
                          double margin, double r);

/// v(tau_k^+) <= F^{-1}(alpha2(||state(tau_0^+)||), k*margin) while the
/// trajectory stays above the threshold.
CheckReport verify_envelope(const TrajectoryRecord& rec, const RateSet& rates,
                            const RateFunction& alpha2, double margin,
                            double r);

/// Within each inter-jump segment, once the region flag is G+ with norm
/// above chi_slope * d, it stays G+ until the segment ends.
CheckReport verify_gplus_invariance(const TrajectoryRecord& rec,
                                    double chi_slope);

/// First jump whose post-jump state enters the closed norm ball of radius r.
/// The underlying claim has no finite-time bound, so a miss within the
/// horizon is reported as not observed rather than as a failure.
struct BallEntry {
  bool observed = false;
  long k0 = -1;
  double tau = 0;
};
BallEntry first_ball_entry(const TrajectoryRecord& rec, double r);

struct IssReport {
  bool pass = true;
  bool empirical_only = false;
  std::string detail;
  struct Level {
    double d = 0;
    double long_run_sup = 0;   // sup of the norm over the last quarter
    double terminal_norm = 0;
    double initial_norm = 0;
  };
  std::vector<Level> levels;
};

/// Empirical ISS comparison across disturbance levels: long-run bounds
/// finite and monotone in d; zero-disturbance runs end below
/// zero_fraction of their initial norm. A single record is flagged
/// "empirical only" and not gated.
IssReport verify_iss_bound(const std::vector<TrajectoryRecord>& recs,
                           const std::vector<double>& d_levels,
                           double zero_fraction = 1e-3);

struct InstabilityReport {
  bool continuous_unstable = false;
  bool discrete_not_asymptotically_stable = false;
  double growth_factor = 0;   // max norm / initial norm over the no-jump flow
  double first_exceed_time = -1;
  double spectral_radius = 0;
  bool pass() const {
    return continuous_unstable && discrete_not_asymptotically_stable;
  }
};

/// (i) no-jump flow from (x=0, y=1) with d=0 grows past 10x the initial norm
/// before t=horizon; (ii) jump spectral radius >= 1 - 1e-8.
InstabilityReport instability_probe(const ExampleParams& p, int n_interior,
                                    double dt, double horizon = 20.0);

}  // namespace dwell
