#include "sadm/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sadm/additive.hpp"

namespace sadm {

using nlohmann::json;

namespace {

struct Destination {
  std::optional<std::filesystem::path> file;
  OutputFormat format = OutputFormat::Csv;
};

Destination resolve_destination(std::string_view command, const CommandOptions& options,
                                const ExperimentConfig& config) {
  Destination dest;
  std::optional<std::string> path = options.output ? options.output : config.output.path;
  if (options.format) {
    dest.format = *options.format;
  } else if (config.output.format) {
    dest.format = *config.output.format;
  } else if (path && std::filesystem::path(*path).extension() == ".json") {
    dest.format = OutputFormat::Json;
  }
  if (path && *path != "-") {
    dest.file = *path;
  } else if (!path) {
    if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
      dest.file = std::filesystem::path(dir) /
                  (std::string(command) + (dest.format == OutputFormat::Json ? ".json" : ".csv"));
    }
  }
  return dest;
}

void emit(const Destination& dest, const std::string& contents, std::ostream& out) {
  if (dest.file) {
    write_file_atomic(*dest.file, contents);
  } else {
    out << contents;
  }
}

void emit(const Destination& dest, const Table& table, const json& doc, std::ostream& out) {
  emit(dest, dest.format == OutputFormat::Json ? doc.dump(2) + "\n" : table.to_csv(), out);
}

bool all_finite(const PolicySolution& s) {
  for (double g : s.gains) {
    if (!std::isfinite(g)) return false;
  }
  for (double q : s.coefficients) {
    if (!std::isfinite(q)) return false;
  }
  return true;
}

void require_multiplicative(const CascadeConfig& cascade) {
  if (cascade.has_additive_noise()) {
    throw ConfigError(
        "additive noise (c.std_dev > 0) has no closed-form linear policy; use "
        "'simulate --policy grid' for the numeric solution");
  }
}

GridValueTable solve_grid(const ExperimentConfig& config, const CommandOptions& options) {
  const double x_max = config.grid.x_max.value_or(1.5 * config.cascade.x0);
  const int n_u = options.grid_points.value_or(config.grid.n_u);
  return grid_dp_additive(config.cascade, x_max, config.grid.n_x, n_u);
}

Policy make_policy(const std::string& name, const ExperimentConfig& config,
                   const CommandOptions& options) {
  const auto& cascade = config.cascade;
  if (name == "betz") return Policy::betz_greedy();
  if (name == "deterministic") {
    return Policy::linear_gains(solve_cascade(mean_field(cascade)).gains);
  }
  if (name == "grid") return Policy::tabulated(solve_grid(config, options));
  if (name == "optimal") {
    if (cascade.has_additive_noise()) return Policy::tabulated(solve_grid(config, options));
    return Policy::linear_gains(solve_cascade(cascade).gains);
  }
  throw ConfigError("unknown policy '" + name +
                    "' (expected optimal, betz, deterministic or grid)");
}

int cmd_solve(const ExperimentConfig& config, const CommandOptions& options, std::ostream& out,
              std::ostream& err) {
  require_multiplicative(config.cascade);
  const auto solution = solve_cascade(config.cascade);
  if (!all_finite(solution)) {
    err << "solve: recursion produced non-finite values\n";
    return kExitNumericFailure;
  }
  emit(resolve_destination("solve", options, config), solve_table(solution),
       solve_json(config.cascade, solution), out);
  return kExitOk;
}

int cmd_sweep(const ExperimentConfig& config, const CommandOptions& options, std::ostream& out,
              std::ostream& err) {
  if (!config.sweep) throw ConfigError("sweep: config has no 'sweep' block");
  require_multiplicative(config.cascade);
  const auto table = sweep_table(config.cascade, *config.sweep);
  for (const auto& row : table.rows()) {
    for (const auto& cell : row) {
      if (const auto* d = std::get_if<double>(&cell); d && !std::isfinite(*d)) {
        err << "sweep: recursion produced non-finite values\n";
        return kExitNumericFailure;
      }
    }
  }
  json doc = {{"parameter", to_string(config.sweep->parameter)}, {"rows", table.to_json()}};
  emit(resolve_destination("sweep", options, config), table, doc, out);
  return kExitOk;
}

int cmd_verify(const ExperimentConfig& config, const CommandOptions& options, std::ostream& out,
               std::ostream& err) {
  require_multiplicative(config.cascade);
  auto solution = options.solution_path ? read_solution(*options.solution_path)
                                        : solve_cascade(config.cascade);
  if (options.inject_gain_offset != 0.0 && !solution.gains.empty()) {
    solution.gains.front() += options.inject_gain_offset;
  }
  const int n_u = options.grid_points.value_or(1'000'000);
  if (n_u < 1000) throw ConfigError("--grid-points must be at least 1000");
  const auto report = verify_policy(config.cascade, solution, n_u);
  emit(resolve_destination("verify", options, config), verification_table(report),
       verification_json(report), out);
  if (!report.pass) {
    err << "verify: FAILED, max gap " << format_number(report.max_gap) << " exceeds "
        << format_number(report.tolerance) << "\n";
    return kExitVerificationFailed;
  }
  return kExitOk;
}

int cmd_simulate(const ExperimentConfig& config, const CommandOptions& options,
                 std::ostream& out, std::ostream& err) {
  if (!config.simulation) throw ConfigError("simulate: config has no 'simulation' block");
  const auto& sim = *config.simulation;
  const auto n_samples = options.samples.value_or(sim.n_samples);
  const auto seed = options.seed.value_or(sim.seed);
  if (n_samples < 1) throw ConfigError("--samples must be at least 1");
  try {
    build_samplers(config.cascade, sim.family);
  } catch (const ValidationError& e) {
    err << "simulate: sampler family '" << to_string(sim.family)
        << "' is incompatible with the configured moments: " << e.what() << "\n";
    return kExitSamplerIncompatible;
  }

  std::vector<std::string> names = options.policies;
  if (names.empty()) names.push_back("optimal");
  std::vector<NamedPolicy> policies;
  for (const auto& name : names) policies.push_back({name, make_policy(name, config, options)});

  std::vector<PolicyComparisonRow> rows;
  if (policies.size() == 1) {
    rows.push_back({policies[0].name,
                    estimate_expected_power(config.cascade, policies[0].policy, n_samples, seed,
                                            sim.family)});
  } else {
    rows = compare_policies(config.cascade, policies, n_samples, seed, sim.family);
  }

  const auto table = simulation_table(rows, config.cascade.n_turbines);
  json doc = {{"family", to_string(sim.family)},
              {"n_samples", n_samples},
              {"seed", seed},
              {"policies", json::array()}};
  if (!config.cascade.has_additive_noise()) {
    const auto& c = config.cascade;
    doc["analytic_max_power"] = max_power(solve_cascade(c).q0(), c.rho, c.area, c.x0);
  }
  for (const auto& row : rows) {
    const auto& r = row.report;
    doc["policies"].push_back({{"policy", row.name},
                               {"mean_total_power", r.mean_total_power},
                               {"std_error", r.std_error},
                               {"ci95_low", r.ci95_low()},
                               {"ci95_high", r.ci95_high()},
                               {"negative_state_fraction", r.negative_state_fraction},
                               {"per_subarray_efficiency", r.per_subarray_efficiency}});
  }
  emit(resolve_destination("simulate", options, config), table, doc, out);
  return kExitOk;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    cells.push_back(cell);
  }
  return cells;
}

}  // namespace

Table solve_table(const PolicySolution& solution) {
  Table table({"k", "psi", "psi_normalized", "Q", "eta", "status"});
  for (std::size_t k = 0; k < solution.gains.size(); ++k) {
    const double psi = solution.gains[k];
    const double q = solution.coefficients[k];
    table.add_row({static_cast<std::int64_t>(k), psi, psi / (1.0 / 3.0), q,
                   subarray_efficiency(q), std::string(to_string(solution.clamped[k]))});
  }
  return table;
}

json solve_json(const CascadeConfig& cascade, const PolicySolution& solution) {
  return {{"n_turbines", cascade.n_turbines},
          {"x0", cascade.x0},
          {"rho", cascade.rho},
          {"area", cascade.area},
          {"q0", solution.q0()},
          {"max_power_w", max_power(solution.q0(), cascade.rho, cascade.area, cascade.x0)},
          {"Q_terminal", solution.coefficients.back()},
          {"turbines", solve_table(solution).to_json()}};
}

Table sweep_table(const CascadeConfig& cascade, const SweepSpec& sweep) {
  Table table({"sweep_value", "turbine_index", "psi", "psi_normalized", "Q", "eta"});
  for (double value : sweep.values) {
    const auto solution = solve_cascade(with_swept_value(cascade, sweep.parameter, value));
    for (std::size_t k = 0; k < solution.gains.size(); ++k) {
      const double psi = solution.gains[k];
      const double q = solution.coefficients[k];
      table.add_row({value, static_cast<std::int64_t>(k), psi, psi / (1.0 / 3.0), q,
                     subarray_efficiency(q)});
    }
  }
  return table;
}

Table verification_table(const VerificationReport& report) {
  Table table({"k", "psi_analytic", "psi_oracle", "gap", "status", "pass"});
  for (const auto& s : report.stages) {
    table.add_row({static_cast<std::int64_t>(s.stage), s.analytic_psi, s.oracle_psi, s.gap,
                   std::string(to_string(s.status)), std::string(s.pass ? "true" : "false")});
  }
  return table;
}

json verification_json(const VerificationReport& report) {
  json stages = json::array();
  for (const auto& s : report.stages) {
    stages.push_back({{"k", s.stage},
                      {"psi_analytic", s.analytic_psi},
                      {"psi_oracle", s.oracle_psi},
                      {"gap", s.gap},
                      {"status", to_string(s.status)},
                      {"pass", s.pass}});
  }
  return {{"pass", report.pass},
          {"max_gap", report.max_gap},
          {"grid_points", report.grid_points},
          {"grid_spacing", report.grid_spacing},
          {"tolerance", report.tolerance},
          {"stages", stages}};
}

Table simulation_table(const std::vector<PolicyComparisonRow>& rows, int n_turbines) {
  std::vector<std::string> columns{"policy",    "mean_total_power", "std_error",
                                   "ci95_low",  "ci95_high",        "n_samples",
                                   "seed",      "negative_state_fraction"};
  for (int l = 0; l < n_turbines; ++l) columns.push_back("eta_" + std::to_string(l));
  Table table(std::move(columns));
  for (const auto& row : rows) {
    const auto& r = row.report;
    std::vector<Table::Cell> cells{row.name,
                                   r.mean_total_power,
                                   r.std_error,
                                   r.ci95_low(),
                                   r.ci95_high(),
                                   r.n_samples,
                                   static_cast<std::int64_t>(r.seed),
                                   r.negative_state_fraction};
    for (double eta : r.per_subarray_efficiency) cells.emplace_back(eta);
    table.add_row(std::move(cells));
  }
  return table;
}

PolicySolution read_solution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open solution file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw ConfigError("solution file is empty");

  PolicySolution solution;
  try {
    if (text[first] == '{') {
      const auto doc = json::parse(text);
      for (const auto& row : doc.at("turbines")) {
        solution.gains.push_back(row.at("psi").get<double>());
        solution.clamped.push_back(gain_status_from_string(row.at("status").get<std::string>()));
      }
    } else {
      std::stringstream lines(text);
      std::string line;
      std::getline(lines, line);
      const auto header = split_csv_line(line);
      std::size_t psi_col = header.size();
      std::size_t status_col = header.size();
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "psi") psi_col = i;
        if (header[i] == "status") status_col = i;
      }
      if (psi_col == header.size() || status_col == header.size()) {
        throw ConfigError("solution CSV needs 'psi' and 'status' columns");
      }
      while (std::getline(lines, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) throw ConfigError("ragged solution CSV row");
        solution.gains.push_back(std::stod(cells[psi_col]));
        solution.clamped.push_back(gain_status_from_string(cells[status_col]));
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("cannot parse solution file " + path + ": " + e.what());
  }
  solution.coefficients.assign(solution.gains.size() + 1, 0.0);
  return solution;
}

int run_command(std::string_view command, const CommandOptions& options, std::ostream& out,
                std::ostream& err) {
  try {
    const auto config = load_experiment(options.config_path);
    if (command == "solve") return cmd_solve(config, options, out, err);
    if (command == "sweep") return cmd_sweep(config, options, out, err);
    if (command == "verify") return cmd_verify(config, options, out, err);
    if (command == "simulate") return cmd_simulate(config, options, out, err);
    err << "unknown command '" << command << "'\n";
    return kExitConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumericFailure;
  }
}

}  // namespace sadm
