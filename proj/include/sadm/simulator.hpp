#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sadm/additive.hpp"
#include "sadm/dp.hpp"
#include "sadm/execution.hpp"
#include "sadm/moments.hpp"
#include "sadm/rng.hpp"

namespace sadm {

/// Induction control law u_k = policy(k, x_k).
class Policy {
 public:
  enum class Kind { LinearGains, BetzGreedy, Tabulated };

  /// Gains are clipped into [0, 1/2].
  static Policy linear_gains(std::vector<double> gains);
  static Policy betz_greedy();
  static Policy tabulated(GridValueTable table);

  Kind kind() const { return kind_; }
  const std::vector<double>& gains() const { return gains_; }

  /// Control for stage k at state x, always inside [0, x/2].
  double control(int k, double x) const;

  /// Throws ValidationError if the policy cannot drive an n-stage cascade.
  void check_stages(int n) const;

 private:
  Kind kind_ = Kind::BetzGreedy;
  std::vector<double> gains_;
  std::shared_ptr<const GridValueTable> table_;
};

struct StageSamplers {
  SampledDistribution a;
  SampledDistribution b;
  SampledDistribution c;
};

/// Degenerate variables always get a Constant sampler; `family` applies to the
/// rest. Throws ValidationError on a family/moment mismatch.
std::vector<StageSamplers> build_samplers(const CascadeConfig& config, Family family);

struct Trajectory {
  std::vector<double> states;           // x_0 .. x_N, m/s
  std::vector<double> controls;         // u_0 .. u_{N-1}, m/s
  std::vector<double> disk_velocities;  // y_k = x_k - u_k, m/s
  std::vector<double> powers;           // p_k = 2 rho A y_k^2 u_k, W
  int clamped_state_events = 0;

  double total_power() const;
};

/// One forward pass. Each stage draws a, b, c in that order whatever the
/// policy, so two policies run on the same rng see the same noise.
/// Negative downstream velocities are set to 0 and counted.
Trajectory rollout(const CascadeConfig& config, const Policy& policy,
                   std::span<const StageSamplers> samplers, CounterRng& rng);

struct SimulationReport {
  double mean_total_power = 0.0;  // W
  double std_error = 0.0;         // W
  std::vector<double> per_subarray_efficiency;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
  double negative_state_fraction = 0.0;  // clamped transitions / (n_samples N)

  double ci95_low() const { return mean_total_power - 1.96 * std_error; }
  double ci95_high() const { return mean_total_power + 1.96 * std_error; }
};

/// Monte Carlo estimate of expected total power. Sample i uses
/// CounterRng(seed, i). The parallel path reduces fixed-size blocks in order,
/// so its output is bit-identical for any thread count; the serial path is the
/// plain single-loop reference.
SimulationReport estimate_expected_power(const CascadeConfig& config, const Policy& policy,
                                         std::int64_t n_samples, std::uint64_t seed,
                                         Family family = Family::TwoPointDiscrete,
                                         Execution exec = Execution::Parallel);

struct NamedPolicy {
  std::string name;
  Policy policy;
};

struct PolicyComparisonRow {
  std::string name;
  SimulationReport report;
};

/// One report per policy (at least two) on common random numbers, sorted by mean power
/// (descending, stable).
std::vector<PolicyComparisonRow> compare_policies(const CascadeConfig& config,
                                                  const std::vector<NamedPolicy>& policies,
                                                  std::int64_t n_samples, std::uint64_t seed,
                                                  Family family = Family::TwoPointDiscrete,
                                                  Execution exec = Execution::Parallel);

double pooled_std_error(const SimulationReport& lhs, const SimulationReport& rhs);

}  // namespace sadm
