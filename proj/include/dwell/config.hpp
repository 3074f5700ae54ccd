#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "dwell/harness.hpp"
#include "dwell/params.hpp"
#include "dwell/system.hpp"

namespace dwell {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Initial state description: either a polynomial sample or a sum of
/// Dirichlet sine modes amp * sin(k pi z / l).
struct InitialState {
  Poly x_poly;
  std::vector<std::pair<double, int>> x_modes;  // (amplitude, mode)
  double y = 0;
  HybridState build(double l, int n) const;
};

struct ScheduleSpec {
  enum class Kind { None, Uniform, Random, Explicit } kind = Kind::None;
  double T = 0;                       // uniform
  std::optional<double> tau0;         // uniform
  double theta1 = 0, theta2 = 0;      // random
  std::vector<double> taus;           // explicit
  Schedule build(double horizon, std::uint64_t seed) const;
  std::pair<double, double> gap_bounds() const;  // (min, max) gap it produces
};

struct RunConfig {
  ExampleParams system;
  int grid_n = 100;
  double dt = 1e-3;
  Scheme scheme = Scheme::ImexEuler;
  double horizon = 20;
  double sample_dt = 0.01;
  std::uint64_t seed = 1;
  ScheduleSpec schedule;
  DisturbanceSignal disturbance;
  InitialState initial;
  double threshold_floor = 1e-4;  // verification norm floor when d = 0
  std::optional<double> margin_override;
};

/// Strict parse: unknown keys, wrong types, or out-of-range values raise
/// ConfigError with the JSON path of the offending field.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Flat-file trajectory table: header
///   t,y,l2_x,h01_x,V,W,U,region,jump_index
/// with one extra row pair per jump carrying the left/right limits.
void write_trajectory(std::ostream& os, const TrajectoryRecord& rec);
TrajectoryRecord read_trajectory(std::istream& is);

}  // namespace dwell
