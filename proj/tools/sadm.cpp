// sadm: stochastic actuator-disk wind-farm solver front end.
//
//   sadm solve|sweep|verify|simulate --config PATH [--output PATH]
//        [--format csv|json] [--samples N] [--seed S] [--grid-points G]
//        [--policy NAME]...

#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "sadm/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Optimal induction control for a stochastic wind-turbine cascade"};
  app.require_subcommand(1);

  sadm::CommandOptions options;
  std::string format;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  int grid_points = 0;
  std::string solution_path;

  const std::map<std::string, sadm::OutputFormat> formats{{"csv", sadm::OutputFormat::Csv},
                                                          {"json", sadm::OutputFormat::Json}};

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", options.config_path, "Experiment config (JSON)")->required();
    sub->add_option("--output", options.output, "Output file ('-' for stdout)");
    sub->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  auto* solve = app.add_subcommand("solve", "Optimal gains, value coefficients, efficiencies");
  auto* sweep = app.add_subcommand("sweep", "Solve once per value of the swept moment");
  auto* verify = app.add_subcommand("verify", "Certify the analytic gains by grid search");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo evaluation of policies");
  for (auto* sub : {solve, sweep, verify, simulate}) add_common(sub);

  auto* grid_opt = verify->add_option("--grid-points", grid_points,
                                      "Oracle grid size over psi in [0, 1/2] (default 1e6)");
  verify->add_option("--solution", solution_path, "Verify this solve output instead");
  verify->add_option("--inject-gain-offset", options.inject_gain_offset)
      ->group("");  // test hook

  auto* samples_opt = simulate->add_option("--samples", samples, "Monte Carlo rollouts");
  auto* seed_opt = simulate->add_option("--seed", seed, "RNG seed");
  auto* sim_grid_opt =
      simulate->add_option("--grid-points", grid_points, "Control grid size for grid DP");
  simulate->add_option("--policy", options.policies,
                       "optimal, betz, deterministic or grid; repeat to compare");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : sadm::kExitConfigError;
  }

  if (!format.empty()) options.format = formats.at(format);
  if (samples_opt->count() > 0) options.samples = samples;
  if (seed_opt->count() > 0) options.seed = seed;
  if (grid_opt->count() > 0 || sim_grid_opt->count() > 0) options.grid_points = grid_points;
  if (!solution_path.empty()) options.solution_path = solution_path;

  const auto* chosen = app.get_subcommands().front();
  return sadm::run_command(chosen->get_name(), options, std::cout, std::cerr);
}
