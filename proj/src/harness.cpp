#include "dwell/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace dwell {

namespace {
double gap_extreme(const std::vector<double>& taus, bool want_min) {
  if (taus.size() < 2) return 0;
  double best = want_min ? std::numeric_limits<double>::infinity()
                         : -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < taus.size(); ++i) {
    const double g = taus[i] - taus[i - 1];
    best = want_min ? std::min(best, g) : std::max(best, g);
  }
  return best;
}
}  // namespace

double Schedule::min_gap() const { return gap_extreme(taus, true); }
double Schedule::max_gap() const { return gap_extreme(taus, false); }

Schedule Schedule::uniform(double T, double horizon,
                           std::optional<double> tau0) {
  if (!(T > 0)) throw std::invalid_argument("Schedule: T must be positive");
  Schedule s;
  s.horizon = horizon;
  s.gap_range = {{T, T}};
  const double start = tau0.value_or(T);
  for (long k = 0;; ++k) {
    const double tau = start + double(k) * T;
    if (tau > horizon * (1.0 + 1e-12)) break;
    s.taus.push_back(tau);
  }
  return s;
}

Schedule Schedule::random(std::uint64_t seed, double theta1, double theta2,
                          double horizon) {
  if (!(theta1 > 0) || !(theta2 >= theta1))
    throw std::invalid_argument("Schedule: need 0 < theta1 <= theta2");
  Schedule s;
  s.horizon = horizon;
  s.gap_range = {{theta1, theta2}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gap(theta1, theta2);
  double tau = gap(rng);
  while (tau <= horizon) {
    s.taus.push_back(tau);
    tau += gap(rng);
  }
  return s;
}

Schedule Schedule::explicit_list(
    std::vector<double> taus, double horizon,
    std::optional<std::pair<double, double>> window) {
  for (std::size_t i = 1; i < taus.size(); ++i)
    if (!(taus[i] > taus[i - 1]))
      throw std::invalid_argument("Schedule: times must strictly increase");
  Schedule s;
  s.taus = std::move(taus);
  s.horizon = horizon;
  s.gap_range = window;
  if (window) {
    for (std::size_t i = 1; i < s.taus.size(); ++i) {
      const double g = s.taus[i] - s.taus[i - 1];
      if (g < window->first - 1e-12 || g > window->second + 1e-12)
        s.window_admissible = false;
    }
  }
  return s;
}

namespace {

SamplePoint make_sample(const HybridState& s, long jump_index = -1) {
  SamplePoint pt;
  pt.t = s.t;
  pt.y = s.y;
  pt.l2_x = l2_norm(s.x);
  pt.h01_x = h01_norm(s.x);
  pt.V = pt.h01_x * pt.h01_x + s.y * s.y;
  pt.W = s.y * s.y - pt.h01_x * pt.h01_x;
  pt.U = pt.l2_x * pt.l2_x + s.y * s.y;
  pt.gplus = pt.W >= 0;
  pt.jump_index = jump_index;
  return pt;
}

}  // namespace

TrajectoryRecord run_trajectory(const FlowParams& p, const HybridState& s0,
                                const Schedule& sched,
                                const DisturbanceSignal& d, double sample_dt,
                                double horizon) {
  if (!(sample_dt > 0))
    throw std::invalid_argument("run_trajectory: sample_dt must be > 0");
  TrajectoryRecord rec;
  rec.n = p.n;
  rec.l = p.l;
  rec.dt = p.dt;
  rec.sample_dt = sample_dt;
  rec.horizon = horizon;
  rec.scheme = p.scheme;
  rec.d_sup = d.sup_norm(p.l);

  HybridState cur = s0;
  const bool jump_at_start =
      !sched.taus.empty() && sched.taus.front() <= cur.t + 1e-12;
  if (!jump_at_start) rec.samples.push_back(make_sample(cur));

  // Advance to `target`, recording on the absolute sample_dt grid; the
  // landing row at `target` itself is the caller's responsibility.
  auto flow_and_sample = [&](double target) {
    while (cur.t < target - 1e-12) {
      const double j = std::floor(cur.t / sample_dt + 1e-9) + 1.0;
      const double t_next = std::min(j * sample_dt, target);
      cur = flow(cur, p, d, t_next);
      if (cur.t < target - 1e-12) rec.samples.push_back(make_sample(cur));
    }
  };

  long k = 0;
  for (double tau : sched.taus) {
    if (tau > horizon * (1.0 + 1e-12)) break;
    flow_and_sample(tau);
    cur.t = tau;
    JumpRecord jr;
    jr.k = k;
    jr.tau = tau;
    const SamplePoint before = make_sample(cur, k);
    jr.V_before = before.V;
    jr.norm_before = std::sqrt(std::max(before.V, 0.0));
    jr.gplus_before = before.gplus;
    rec.samples.push_back(before);
    Poly d21;
    const double scale = d.d21_scale(k);
    if (scale != 0) d21 = scale * d.d21_shape;
    cur = apply_jump(cur, p, d21, d.d22_value(k));
    const SamplePoint after = make_sample(cur, k);
    jr.V_after = after.V;
    jr.norm_after = std::sqrt(std::max(after.V, 0.0));
    jr.gplus_after = after.gplus;
    rec.samples.push_back(after);
    rec.jumps.push_back(jr);
    ++k;
  }
  if (cur.t < horizon - 1e-12) {
    flow_and_sample(horizon);
    rec.samples.push_back(make_sample(cur));
  }
  rec.final_state = cur;
  return rec;
}

namespace {

// Lipschitz estimate of V along the record (jump discontinuities excluded).
double lipschitz_v(const TrajectoryRecord& rec) {
  double lip = 0;
  for (std::size_t i = 1; i < rec.samples.size(); ++i) {
    const auto& a = rec.samples[i - 1];
    const auto& b = rec.samples[i];
    const double dt = b.t - a.t;
    if (dt <= 0) continue;  // jump row pair
    lip = std::max(lip, std::abs(b.V - a.V) / dt);
  }
  return lip;
}

double record_tol(const TrajectoryRecord& rec) {
  const double h = rec.grid_h();
  return 10.0 * (rec.dt + h * h) * std::max(lipschitz_v(rec), 1e-12);
}

// Minimum state norm per inter-jump segment k = (tau_k, tau_{k+1}]: the
// post-jump value at tau_k, flow samples strictly inside, and the pre-jump
// value at tau_{k+1}. One entry per segment between consecutive jumps.
std::vector<double> segment_min_norms(const TrajectoryRecord& rec) {
  if (rec.jumps.size() < 2) return {};
  std::vector<double> mins(rec.jumps.size() - 1,
                           std::numeric_limits<double>::infinity());
  std::size_t seg = 0;
  bool past_first_jump = false;
  for (std::size_t i = 0; i < rec.samples.size(); ++i) {
    const auto& s = rec.samples[i];
    if (s.jump_index >= 0) {
      const bool is_after =
          i > 0 && rec.samples[i - 1].jump_index == s.jump_index &&
          rec.samples[i - 1].t == s.t;
      if (is_after) {
        if (std::size_t(s.jump_index) >= mins.size() + 1) break;
        seg = std::size_t(s.jump_index);
        past_first_jump = true;
        if (seg < mins.size())
          mins[seg] = std::min(mins[seg], std::sqrt(std::max(s.V, 0.0)));
      } else if (past_first_jump && std::size_t(s.jump_index) >= 1) {
        const std::size_t ending = std::size_t(s.jump_index) - 1;
        if (ending < mins.size())
          mins[ending] =
              std::min(mins[ending], std::sqrt(std::max(s.V, 0.0)));
      }
      continue;
    }
    if (past_first_jump && seg < mins.size())
      mins[seg] = std::min(mins[seg], std::sqrt(std::max(s.V, 0.0)));
  }
  return mins;
}

}  // namespace

CheckReport verify_jump_contraction(const TrajectoryRecord& rec, const RateSet& rates,
                          double margin, double r) {
  CheckReport rep;
  rep.name = "jump_contraction";
  rep.tol = record_tol(rec);
  rep.worst_slack = std::numeric_limits<double>::infinity();
  if (rec.jumps.size() < 2) {
    rep.vacuous = true;
    rep.worst_slack = 0;
    rep.detail = "fewer than two jumps";
    return rep;
  }
  const std::vector<double> mins = segment_min_norms(rec);
  const std::size_t nseg = mins.size();
  long checks = 0;
  std::size_t p = 0;
  while (p < nseg) {
    if (mins[p] < r) {
      ++p;
      continue;
    }
    std::size_t m = p;
    while (m < nseg && mins[m] >= r) ++m;  // segments p..m-1, jumps p..m
    for (std::size_t start = p; start < m; ++start) {
      const double vp = rec.jumps[start].V_after;
      for (std::size_t l = start + 1; l <= m; ++l) {
        const double vl = rec.jumps[l].V_after;
        ++checks;
        if (vl <= 0 || vp <= 0) continue;  // reached the origin exactly
        const double F = f_integral(rates, vl, vp);
        const double slack = F - margin * double(l - start);
        rep.worst_slack = std::min(rep.worst_slack, slack);
        if (slack < -rep.tol) rep.pass = false;
      }
    }
    p = m + 1;
  }
  rep.checks = checks;
  if (checks == 0) {
    rep.vacuous = true;
    rep.worst_slack = 0;
    rep.detail = "no jump range stays above the threshold";
  }
  return rep;
}

CheckReport verify_envelope(const TrajectoryRecord& rec, const RateSet& rates,
                            const RateFunction& alpha2, double margin,
                            double r) {
  CheckReport rep;
  rep.name = "decay_envelope";
  rep.tol = record_tol(rec);
  rep.worst_slack = std::numeric_limits<double>::infinity();
  if (rec.jumps.empty()) {
    rep.vacuous = true;
    rep.worst_slack = 0;
    rep.detail = "no jumps";
    return rep;
  }
  const std::vector<double> mins = segment_min_norms(rec);
  // largest kmax with the whole flow above the threshold on (tau_0, tau_kmax]
  std::size_t kmax = 0;
  while (kmax < mins.size() && mins[kmax] >= r) ++kmax;
  const double norm0 = rec.jumps.front().norm_after;
  if (norm0 <= 0 || kmax == 0) {
    rep.vacuous = true;
    rep.worst_slack = 0;
    rep.detail = "trajectory below the threshold from the first jump on";
    return rep;
  }
  long checks = 0;
  for (std::size_t kk = 0; kk <= kmax; ++kk) {
    const double env = decay_envelope(rates, alpha2, norm0, margin, long(kk));
    const double slack = env - rec.jumps[kk].V_after;
    ++checks;
    rep.worst_slack = std::min(rep.worst_slack, slack);
    if (slack < -rep.tol && rep.pass) {
      rep.pass = false;
      rep.detail = "first violation at jump " + std::to_string(kk);
    }
  }
  rep.checks = checks;
  return rep;
}

CheckReport verify_gplus_invariance(const TrajectoryRecord& rec,
                                    double chi_slope) {
  CheckReport rep;
  rep.name = "gplus_invariance";
  const double thresh = chi_slope * rec.d_sup;
  long checks = 0;
  bool armed = false;
  for (std::size_t i = 0; i < rec.samples.size() && rep.pass; ++i) {
    const auto& s = rec.samples[i];
    const bool is_after_row =
        s.jump_index >= 0 && i > 0 &&
        rec.samples[i - 1].jump_index == s.jump_index &&
        rec.samples[i - 1].t == s.t;
    if (is_after_row) armed = false;  // new segment starts at tau_k^+
    const double norm = std::sqrt(std::max(s.V, 0.0));
    if (armed) {
      ++checks;
      if (norm <= thresh) {
        armed = false;  // hypothesis lapses below the threshold
      } else if (!s.gplus) {
        rep.pass = false;
        rep.detail = "G+ lost inside a segment at t = " + std::to_string(s.t);
        break;
      }
    }
    if (!armed && s.gplus && norm > thresh) armed = true;
  }
  rep.checks = checks;
  if (checks == 0 && rep.pass) {
    rep.vacuous = true;
    rep.detail = "never in G+ above the threshold";
  }
  return rep;
}

BallEntry first_ball_entry(const TrajectoryRecord& rec, double r) {
  BallEntry e;
  for (const auto& j : rec.jumps) {
    if (j.norm_after < r) {
      e.observed = true;
      e.k0 = j.k;
      e.tau = j.tau;
      break;
    }
  }
  return e;
}

IssReport verify_iss_bound(const std::vector<TrajectoryRecord>& recs,
                           const std::vector<double>& d_levels,
                           double zero_fraction) {
  IssReport rep;
  if (recs.size() != d_levels.size())
    throw std::invalid_argument("verify_iss_bound: level count mismatch");
  if (recs.size() < 2) {
    rep.empirical_only = true;
    rep.detail = "single run: empirical only, not gated";
  }
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& rec = recs[i];
    IssReport::Level lvl;
    lvl.d = d_levels[i];
    lvl.initial_norm = std::sqrt(std::max(rec.samples.front().V, 0.0));
    lvl.terminal_norm = std::sqrt(std::max(rec.samples.back().V, 0.0));
    const double t_start = 0.75 * rec.horizon;
    double sup = 0;
    for (const auto& s : rec.samples)
      if (s.t >= t_start) sup = std::max(sup, std::sqrt(std::max(s.V, 0.0)));
    lvl.long_run_sup = sup;
    if (!std::isfinite(sup)) {
      rep.pass = false;
      rep.detail = "long-run bound not finite at d = " + std::to_string(lvl.d);
    }
    rep.levels.push_back(lvl);
  }
  std::vector<std::size_t> order(rep.levels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rep.levels[a].d < rep.levels[b].d;
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto& lo = rep.levels[order[i - 1]];
    const auto& hi = rep.levels[order[i]];
    if (hi.long_run_sup < lo.long_run_sup - 1e-12) {
      rep.pass = false;
      rep.detail = "long-run bound decreased from d = " + std::to_string(lo.d) +
                   " to d = " + std::to_string(hi.d);
    }
  }
  for (const auto& lvl : rep.levels) {
    if (lvl.d == 0 && lvl.initial_norm > 0 &&
        lvl.terminal_norm > zero_fraction * lvl.initial_norm) {
      rep.pass = false;
      rep.detail = "zero-disturbance run ended at " +
                   std::to_string(lvl.terminal_norm / lvl.initial_norm) +
                   " of its initial norm";
    }
  }
  return rep;
}

InstabilityReport instability_probe(const ExampleParams& p, int n_interior,
                                    double dt, double horizon) {
  InstabilityReport rep;
  const FlowParams fp = FlowParams::make(p, n_interior, dt, Scheme::ImexEuler);
  HybridState s{GridFunction(p.l, n_interior), 1.0, 0.0};
  const double norm0 = state_norm(s);
  const DisturbanceSignal d0;
  double best = norm0;
  const double step = std::max(horizon / 2000.0, dt);
  while (s.t < horizon) {
    s = flow(s, fp, d0, std::min(s.t + step, horizon));
    const double norm = state_norm(s);
    best = std::max(best, norm);
    if (norm > 10.0 * norm0) {
      rep.continuous_unstable = true;
      rep.first_exceed_time = s.t;
      break;
    }
  }
  rep.growth_factor = best / norm0;
  rep.spectral_radius = jump_spectral_radius(p, n_interior);
  rep.discrete_not_asymptotically_stable = rep.spectral_radius >= 1.0 - 1e-8;
  return rep;
}

}  // namespace dwell
