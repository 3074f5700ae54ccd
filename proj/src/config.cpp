#include "dwell/config.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace dwell {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

void check_keys(const json& j, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) fail(path + "/" + key, "unknown key");
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double get_number_or(const json& j, const std::string& key,
                     const std::string& path, double fallback) {
  if (!j.contains(key)) return fallback;
  return get_number(j.at(key), path + "/" + key);
}

Poly get_poly(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of coefficients");
  std::vector<double> c;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(path + "[" + std::to_string(i) + "]",
                                "expected a number");
    c.push_back(j[i].get<double>());
  }
  if (int(c.size()) > Poly::kMaxUserDegree + 1)
    fail(path, "degree exceeds 16");
  return Poly(std::move(c));
}

TimeProfile get_profile(const json& j, const std::string& path,
                        std::uint64_t seed) {
  check_keys(j, path, {"kind", "value", "amplitude", "frequency", "phase",
                       "period"});
  if (!j.contains("kind")) fail(path, "missing kind");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "zero") return TimeProfile::zero();
  if (kind == "constant")
    return TimeProfile::constant(get_number_or(j, "value", path, 0.0));
  if (kind == "sinusoid")
    return TimeProfile::sinusoid(get_number_or(j, "amplitude", path, 0.0),
                                 get_number_or(j, "frequency", path, 1.0),
                                 get_number_or(j, "phase", path, 0.0));
  if (kind == "piecewise")
    return TimeProfile::piecewise_constant(
        get_number_or(j, "amplitude", path, 0.0),
        get_number_or(j, "period", path, 1.0), seed);
  fail(path + "/kind", "unknown profile kind '" + kind + "'");
}

}  // namespace

HybridState InitialState::build(double l, int n) const {
  GridFunction x = x_poly.is_zero() && x_modes.empty()
                       ? GridFunction(l, n)
                       : GridFunction::sample(
                             [&](double z) {
                               double v = x_poly(z);
                               for (const auto& [amp, mode] : x_modes)
                                 v += amp * std::sin(double(mode) * M_PI * z / l);
                               return v;
                             },
                             l, n);
  return HybridState{std::move(x), y, 0.0};
}

Schedule ScheduleSpec::build(double horizon, std::uint64_t seed) const {
  switch (kind) {
    case Kind::None:
      return Schedule::explicit_list({}, horizon);
    case Kind::Uniform:
      return Schedule::uniform(T, horizon, tau0);
    case Kind::Random:
      return Schedule::random(seed, theta1, theta2, horizon);
    case Kind::Explicit:
      return Schedule::explicit_list(taus, horizon);
  }
  return Schedule::explicit_list({}, horizon);
}

std::pair<double, double> ScheduleSpec::gap_bounds() const {
  switch (kind) {
    case Kind::Uniform:
      return {T, T};
    case Kind::Random:
      return {theta1, theta2};
    case Kind::Explicit: {
      double lo = std::numeric_limits<double>::infinity(), hi = 0;
      for (std::size_t i = 1; i < taus.size(); ++i) {
        lo = std::min(lo, taus[i] - taus[i - 1]);
        hi = std::max(hi, taus[i] - taus[i - 1]);
      }
      if (taus.size() < 2) return {0, 0};
      return {lo, hi};
    }
    case Kind::None:
      return {0, 0};
  }
  return {0, 0};
}

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  RunConfig cfg;
  check_keys(root, "", {"system", "grid_n", "dt", "scheme", "horizon",
                        "sample_dt", "seed", "schedule", "disturbance",
                        "initial", "threshold_floor", "margin_override"});
  if (!root.contains("system")) fail("", "missing system");
  {
    const json& s = root.at("system");
    check_keys(s, "system",
               {"a", "c", "l", "B_poly", "D_poly", "alpha_poly", "beta_poly",
                "gamma_poly", "delta_jump", "kappa1", "kappa3", "epsilon"});
    cfg.system.a = get_number_or(s, "a", "system", 1.0);
    cfg.system.c = get_number_or(s, "c", "system", 0.5);
    cfg.system.l = get_number_or(s, "l", "system", M_PI);
    if (s.contains("B_poly"))
      cfg.system.B_poly = get_poly(s.at("B_poly"), "system/B_poly");
    if (s.contains("D_poly"))
      cfg.system.D_poly = get_poly(s.at("D_poly"), "system/D_poly");
    if (s.contains("alpha_poly"))
      cfg.system.alpha_poly = get_poly(s.at("alpha_poly"), "system/alpha_poly");
    if (s.contains("beta_poly"))
      cfg.system.beta_poly = get_poly(s.at("beta_poly"), "system/beta_poly");
    if (s.contains("gamma_poly"))
      cfg.system.gamma_poly = get_poly(s.at("gamma_poly"), "system/gamma_poly");
    cfg.system.delta_jump = get_number_or(s, "delta_jump", "system", 0.0);
    cfg.system.kappa1 = get_number_or(s, "kappa1", "system", 0.0);
    cfg.system.kappa3 = get_number_or(s, "kappa3", "system", 0.0);
    if (s.contains("epsilon"))
      cfg.system.epsilon = get_number(s.at("epsilon"), "system/epsilon");
  }
  if (root.contains("grid_n")) {
    const double n = get_number(root.at("grid_n"), "grid_n");
    if (n < 3 || n != std::floor(n)) fail("grid_n", "expected an integer >= 3");
    cfg.grid_n = int(n);
  }
  cfg.dt = get_number_or(root, "dt", "", cfg.dt);
  if (!(cfg.dt > 0)) fail("dt", "must be positive");
  if (root.contains("scheme")) {
    const std::string s = root.at("scheme").get<std::string>();
    if (s == "imex_euler")
      cfg.scheme = Scheme::ImexEuler;
    else if (s == "imex_cn")
      cfg.scheme = Scheme::ImexCN;
    else
      fail("scheme", "expected imex_euler or imex_cn");
  }
  cfg.horizon = get_number_or(root, "horizon", "", cfg.horizon);
  if (cfg.horizon < 0) fail("horizon", "must be >= 0");
  cfg.sample_dt = get_number_or(root, "sample_dt", "", cfg.sample_dt);
  if (!(cfg.sample_dt > 0)) fail("sample_dt", "must be positive");
  if (root.contains("seed")) {
    const double s = get_number(root.at("seed"), "seed");
    if (s < 0 || s != std::floor(s)) fail("seed", "expected an integer >= 0");
    cfg.seed = std::uint64_t(s);
  }
  if (root.contains("schedule")) {
    const json& s = root.at("schedule");
    check_keys(s, "schedule", {"kind", "T", "tau0", "theta1", "theta2", "taus"});
    const std::string kind =
        s.contains("kind") ? s.at("kind").get<std::string>() : "none";
    if (kind == "none") {
      cfg.schedule.kind = ScheduleSpec::Kind::None;
    } else if (kind == "uniform") {
      cfg.schedule.kind = ScheduleSpec::Kind::Uniform;
      cfg.schedule.T = get_number_or(s, "T", "schedule", 0.5);
      if (s.contains("tau0"))
        cfg.schedule.tau0 = get_number(s.at("tau0"), "schedule/tau0");
    } else if (kind == "random") {
      cfg.schedule.kind = ScheduleSpec::Kind::Random;
      cfg.schedule.theta1 = get_number_or(s, "theta1", "schedule", 0.1);
      cfg.schedule.theta2 = get_number_or(s, "theta2", "schedule", 1.0);
    } else if (kind == "explicit") {
      cfg.schedule.kind = ScheduleSpec::Kind::Explicit;
      if (!s.contains("taus") || !s.at("taus").is_array())
        fail("schedule/taus", "expected an array");
      for (const auto& v : s.at("taus"))
        cfg.schedule.taus.push_back(v.get<double>());
    } else {
      fail("schedule/kind", "unknown schedule kind '" + kind + "'");
    }
  }
  if (root.contains("disturbance")) {
    const json& d = root.at("disturbance");
    check_keys(d, "disturbance", {"d11", "d12", "d21", "d22"});
    if (d.contains("d11")) {
      const json& e = d.at("d11");
      check_keys(e, "disturbance/d11", {"shape", "profile"});
      if (e.contains("shape"))
        cfg.disturbance.d11_shape =
            get_poly(e.at("shape"), "disturbance/d11/shape");
      if (e.contains("profile"))
        cfg.disturbance.d11_profile = get_profile(
            e.at("profile"), "disturbance/d11/profile", cfg.seed ^ 0x11);
    }
    if (d.contains("d12"))
      cfg.disturbance.d12 =
          get_profile(d.at("d12"), "disturbance/d12", cfg.seed ^ 0x12);
    if (d.contains("d21")) {
      const json& e = d.at("d21");
      check_keys(e, "disturbance/d21", {"shape", "amplitude"});
      if (e.contains("shape"))
        cfg.disturbance.d21_shape =
            get_poly(e.at("shape"), "disturbance/d21/shape");
      cfg.disturbance.d21_amp =
          get_number_or(e, "amplitude", "disturbance/d21", 0.0);
    }
    if (d.contains("d22")) {
      const json& e = d.at("d22");
      check_keys(e, "disturbance/d22", {"amplitude"});
      cfg.disturbance.d22_amp =
          get_number_or(e, "amplitude", "disturbance/d22", 0.0);
    }
    cfg.disturbance.jump_seed = cfg.seed ^ 0x2121;
    auto ends_vanish = [&](const Poly& p) {
      double scale = 1.0;
      for (double c : p.coeffs()) scale = std::max(scale, std::abs(c));
      return std::abs(p(0.0)) <= 1e-12 * scale &&
             std::abs(p(cfg.system.l)) <= 1e-12 * scale;
    };
    if (!ends_vanish(cfg.disturbance.d11_shape))
      fail("disturbance/d11/shape", "must vanish at z=0 and z=l");
    if (!ends_vanish(cfg.disturbance.d21_shape))
      fail("disturbance/d21/shape", "must vanish at z=0 and z=l");
  }
  if (root.contains("initial")) {
    const json& i = root.at("initial");
    check_keys(i, "initial", {"x_poly", "x_modes", "y"});
    if (i.contains("x_poly"))
      cfg.initial.x_poly = get_poly(i.at("x_poly"), "initial/x_poly");
    if (i.contains("x_modes")) {
      if (!i.at("x_modes").is_array()) fail("initial/x_modes", "expected array");
      for (const auto& m : i.at("x_modes")) {
        if (!m.is_array() || m.size() != 2)
          fail("initial/x_modes", "expected [amplitude, mode] pairs");
        cfg.initial.x_modes.emplace_back(m[0].get<double>(),
                                         m[1].get<int>());
      }
    }
    cfg.initial.y = get_number_or(i, "y", "initial", 0.0);
  }
  cfg.threshold_floor =
      get_number_or(root, "threshold_floor", "", cfg.threshold_floor);
  if (!(cfg.threshold_floor > 0)) fail("threshold_floor", "must be positive");
  if (root.contains("margin_override"))
    cfg.margin_override = get_number(root.at("margin_override"),
                                     "margin_override");
  try {
    cfg.system.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: system: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

void print_row(std::ostream& os, const SamplePoint& s) {
  char buf[320];
  const char* region = s.gplus ? "G+" : "G-";
  if (s.jump_index >= 0)
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s,%ld\n", s.t,
                  s.y, s.l2_x, s.h01_x, s.V, s.W, s.U, region, s.jump_index);
  else
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%s,\n", s.t, s.y,
                  s.l2_x, s.h01_x, s.V, s.W, s.U, region);
  os << buf;
}

}  // namespace

void write_trajectory(std::ostream& os, const TrajectoryRecord& rec) {
  char head[320];
  std::snprintf(head, sizeof head,
                "# n=%d l=%.17g dt=%.17g sample_dt=%.17g horizon=%.17g "
                "scheme=%s d_sup=%.17g\n",
                rec.n, rec.l, rec.dt, rec.sample_dt, rec.horizon,
                rec.scheme == Scheme::ImexEuler ? "imex_euler" : "imex_cn",
                rec.d_sup);
  os << head;
  os << "t,y,l2_x,h01_x,V,W,U,region,jump_index\n";
  for (const auto& s : rec.samples) print_row(os, s);
}

TrajectoryRecord read_trajectory(std::istream& is) {
  TrajectoryRecord rec;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0)
    throw ConfigError("trajectory: missing metadata line");
  {
    std::istringstream meta(line.substr(2));
    std::string tok;
    while (meta >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      if (key == "n") rec.n = std::stoi(val);
      else if (key == "l") rec.l = std::stod(val);
      else if (key == "dt") rec.dt = std::stod(val);
      else if (key == "sample_dt") rec.sample_dt = std::stod(val);
      else if (key == "horizon") rec.horizon = std::stod(val);
      else if (key == "d_sup") rec.d_sup = std::stod(val);
      else if (key == "scheme")
        rec.scheme = val == "imex_cn" ? Scheme::ImexCN : Scheme::ImexEuler;
    }
  }
  if (!std::getline(is, line) || line.rfind("t,y,", 0) != 0)
    throw ConfigError("trajectory: missing header row");
  SamplePoint prev;
  bool have_prev = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    SamplePoint s;
    auto next = [&](const char* what) {
      if (!std::getline(row, field, ','))
        throw ConfigError(std::string("trajectory: missing field ") + what);
      return field;
    };
    s.t = std::stod(next("t"));
    s.y = std::stod(next("y"));
    s.l2_x = std::stod(next("l2_x"));
    s.h01_x = std::stod(next("h01_x"));
    s.V = std::stod(next("V"));
    s.W = std::stod(next("W"));
    s.U = std::stod(next("U"));
    const std::string region = next("region");
    s.gplus = region == "G+";
    std::getline(row, field, ',');
    s.jump_index = field.empty() ? -1 : std::stol(field);
    if (s.jump_index >= 0 && have_prev && prev.jump_index == s.jump_index &&
        prev.t == s.t) {
      JumpRecord jr;
      jr.k = s.jump_index;
      jr.tau = s.t;
      jr.V_before = prev.V;
      jr.V_after = s.V;
      jr.norm_before = std::sqrt(std::max(prev.V, 0.0));
      jr.norm_after = std::sqrt(std::max(s.V, 0.0));
      jr.gplus_before = prev.gplus;
      jr.gplus_after = s.gplus;
      rec.jumps.push_back(jr);
    }
    rec.samples.push_back(s);
    prev = s;
    have_prev = true;
  }
  return rec;
}

}  // namespace dwell
