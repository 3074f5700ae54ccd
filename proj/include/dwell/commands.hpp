#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "dwell/config.hpp"

namespace dwell {

// Exit-status contract: 0 pass, 1 infeasible/fail, 2 usage or config error.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

struct CommandOptions {
  std::string config_path;
  std::optional<std::string> out_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> grid_n;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<std::string> schedule;  // "uniform:T" | "random:a,b" | "none"
  std::optional<double> epsilon;
  std::optional<std::string> inject_fault;  // test-only checker validation
  std::optional<std::string> sweep_axis;    // "T=..|n=..|amp=.." lists
};

/// Applies CLI overrides onto a parsed config.
RunConfig apply_overrides(RunConfig cfg, const CommandOptions& opt);

int cmd_certify(const RunConfig& cfg, const std::optional<std::string>& out_path,
                std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& cfg, const std::optional<std::string>& out_path,
                 std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, const CommandOptions& opt,
               std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& cfg, const CommandOptions& opt,
              std::ostream& out, std::ostream& err);
int cmd_spectrum(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Full dispatch used by the CLI binary: loads the config, applies
/// overrides, runs the subcommand. Returns the process exit code.
int run_command(const std::string& name, const CommandOptions& opt,
                std::ostream& out, std::ostream& err);

}  // namespace dwell
