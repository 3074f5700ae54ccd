#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dwell/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dwell-time ISS certification, simulation, and verification "
               "for an impulsive ODE-PDE system"};
  app.require_subcommand(1);

  dwell::CommandOptions opt;
  std::string config_path;
  std::string out_path, schedule, inject, axis;
  std::uint64_t seed = 0;
  int grid_n = 0;
  double dt = 0, horizon = 0, epsilon = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration file (JSON)")
        ->required();
    sub->add_option("--out", out_path, "output file (default: stdout)");
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--grid-n", grid_n, "interior grid size override");
    sub->add_option("--dt", dt, "time step override");
    sub->add_option("--horizon", horizon, "horizon override");
    sub->add_option("--schedule", schedule,
                    "schedule override: uniform:T | random:t1,t2 | "
                    "explicit:t0,t1,... | none");
    sub->add_option("--epsilon", epsilon, "certificate epsilon override");
    return sub;
  };

  CLI::App* certify = add_common(app.add_subcommand(
      "certify", "build the dwell-time certificate and report"));
  CLI::App* simulate = add_common(app.add_subcommand(
      "simulate", "run the impulsive simulation, write the trajectory table"));
  CLI::App* verify = add_common(app.add_subcommand(
      "verify", "certify, simulate, and check the contraction/envelope/"
                "invariance estimates along the trajectory"));
  verify->add_option("--inject-fault", inject,
                     "test-only record perturbation: freeze-v | bump | "
                     "flip-region");
  CLI::App* sweep = add_common(app.add_subcommand(
      "sweep", "run a parameter sweep and summarize per point"));
  sweep->add_option("--axis", axis, "axis spec: T=..,.. | n=..,.. | amp=..,..");
  CLI::App* spectrum = add_common(app.add_subcommand(
      "spectrum", "jump-operator spectral radius and matrix eigenvalues"));

  CLI11_PARSE(app, argc, argv);

  opt.config_path = config_path;
  if (!out_path.empty()) opt.out_path = out_path;
  if (app.count_all() != 0) {
    // propagate only the flags the user actually set
    for (CLI::App* sub : {certify, simulate, verify, sweep, spectrum}) {
      if (!sub->parsed()) continue;
      if (sub->count("--seed")) opt.seed = seed;
      if (sub->count("--grid-n")) opt.grid_n = grid_n;
      if (sub->count("--dt")) opt.dt = dt;
      if (sub->count("--horizon")) opt.horizon = horizon;
      if (sub->count("--schedule")) opt.schedule = schedule;
      if (sub->count("--epsilon")) opt.epsilon = epsilon;
      if (sub == verify && sub->count("--inject-fault"))
        opt.inject_fault = inject;
      if (sub == sweep && sub->count("--axis")) opt.sweep_axis = axis;
    }
  }

  const std::string name = app.get_subcommands().front()->get_name();
  return dwell::run_command(name, opt, std::cout, std::cerr);
}
