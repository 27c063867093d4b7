#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "sadm/dp.hpp"
#include "sadm/experiment.hpp"
#include "sadm/oracle.hpp"
#include "sadm/simulator.hpp"

namespace sadm {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 1,
  kExitNumericFailure = 2,
  kExitVerificationFailed = 3,
  kExitSamplerIncompatible = 4,
};

/// Environment variable naming the directory for outputs when neither
/// --output nor output.path is given.
inline constexpr const char* kOutputDirEnv = "SADM_OUTPUT_DIR";

struct CommandOptions {
  std::string config_path;
  std::optional<std::string> output;
  std::optional<OutputFormat> format;
  std::optional<std::int64_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<int> grid_points;
  std::vector<std::string> policies;
  std::optional<std::string> solution_path;  // verify: check this solve output
  double inject_gain_offset = 0.0;           // verify: test hook, added to psi_0
};

/// Runs `solve`, `sweep`, `verify` or `simulate`; diagnostics go to `err`,
/// results to the resolved output (file or `out`).
int run_command(std::string_view command, const CommandOptions& options, std::ostream& out,
                std::ostream& err);

Table solve_table(const PolicySolution& solution);
nlohmann::json solve_json(const CascadeConfig& cascade, const PolicySolution& solution);

/// Long format: sweep_value, turbine_index, psi, psi_normalized, Q, eta.
Table sweep_table(const CascadeConfig& cascade, const SweepSpec& sweep);

Table verification_table(const VerificationReport& report);
nlohmann::json verification_json(const VerificationReport& report);

Table simulation_table(const std::vector<PolicyComparisonRow>& rows, int n_turbines);

/// Reads gains and statuses back from a solve output (CSV or JSON).
PolicySolution read_solution(const std::string& path);

}  // namespace sadm
