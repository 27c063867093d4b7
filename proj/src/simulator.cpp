#include "sadm/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace sadm {

namespace {

constexpr std::int64_t kBlockSize = 1024;

SampledDistribution sampler_for(const MomentSet& m, Family family) {
  return build_sampler(m, m.degenerate() ? Family::Constant : family);
}

// Running totals for a contiguous range of samples.
struct Accumulator {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  std::vector<double> efficiency_sum;
  std::int64_t clamp_events = 0;

  explicit Accumulator(std::size_t n_stages) : efficiency_sum(n_stages, 0.0) {}

  void add(const Trajectory& t, double free_power_scale) {
    const double total = t.total_power();
    ++count;
    const double delta = total - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (total - mean);

    // Ratio estimator of E[P_l / (rho A x_l^3 / 2)], 0 when no wind enters.
    double tail = 0.0;
    for (std::size_t l = efficiency_sum.size(); l-- > 0;) {
      tail += t.powers[l];
      const double x = t.states[l];
      if (x > 0.0) efficiency_sum[l] += tail / (free_power_scale * x * x * x);
    }
    clamp_events += t.clamped_state_events;
  }

  // Chan et al. pairwise combination.
  void merge(const Accumulator& other) {
    if (other.count == 0) return;
    const auto n = count + other.count;
    const double delta = other.mean - mean;
    mean += delta * static_cast<double>(other.count) / static_cast<double>(n);
    m2 += other.m2 + delta * delta * static_cast<double>(count) *
                         static_cast<double>(other.count) / static_cast<double>(n);
    count = n;
    for (std::size_t l = 0; l < efficiency_sum.size(); ++l) {
      efficiency_sum[l] += other.efficiency_sum[l];
    }
    clamp_events += other.clamp_events;
  }
};

SimulationReport finish(const Accumulator& acc, std::uint64_t seed, std::size_t n_stages) {
  SimulationReport report;
  report.n_samples = acc.count;
  report.seed = seed;
  report.mean_total_power = acc.mean;
  if (acc.count > 1) {
    const double var = acc.m2 / static_cast<double>(acc.count - 1);
    report.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(acc.count));
  }
  report.per_subarray_efficiency.resize(n_stages);
  for (std::size_t l = 0; l < n_stages; ++l) {
    report.per_subarray_efficiency[l] = acc.efficiency_sum[l] / static_cast<double>(acc.count);
  }
  report.negative_state_fraction =
      static_cast<double>(acc.clamp_events) /
      (static_cast<double>(acc.count) * static_cast<double>(n_stages));
  return report;
}

}  // namespace

Policy Policy::linear_gains(std::vector<double> gains) {
  Policy p;
  p.kind_ = Kind::LinearGains;
  for (auto& g : gains) {
    if (!std::isfinite(g)) throw ValidationError("policy gains must be finite");
    g = std::clamp(g, 0.0, 0.5);
  }
  p.gains_ = std::move(gains);
  return p;
}

Policy Policy::betz_greedy() { return Policy{}; }

Policy Policy::tabulated(GridValueTable table) {
  Policy p;
  p.kind_ = Kind::Tabulated;
  p.table_ = std::make_shared<const GridValueTable>(std::move(table));
  return p;
}

double Policy::control(int k, double x) const {
  if (x <= 0.0) return 0.0;
  double u = 0.0;
  switch (kind_) {
    case Kind::BetzGreedy: u = x / 3.0; break;
    case Kind::LinearGains: u = gains_[static_cast<std::size_t>(k)] * x; break;
    case Kind::Tabulated: u = table_->policy_at(k, x); break;
  }
  return std::clamp(u, 0.0, 0.5 * x);
}

void Policy::check_stages(int n) const {
  if (kind_ == Kind::LinearGains && gains_.size() != static_cast<std::size_t>(n)) {
    throw ValidationError("policy has " + std::to_string(gains_.size()) + " gains for " +
                          std::to_string(n) + " turbines");
  }
  if (kind_ == Kind::Tabulated && table_->n_stages() != n) {
    throw ValidationError("tabulated policy has the wrong number of stages");
  }
}

std::vector<StageSamplers> build_samplers(const CascadeConfig& config, Family family) {
  std::vector<StageSamplers> samplers;
  samplers.reserve(config.stages.size());
  for (const auto& s : config.stages) {
    samplers.push_back({sampler_for(s.a, family), sampler_for(s.b, family),
                        sampler_for(s.c, family)});
  }
  return samplers;
}

double Trajectory::total_power() const {
  double total = 0.0;
  for (double p : powers) total += p;
  return total;
}

Trajectory rollout(const CascadeConfig& config, const Policy& policy,
                   std::span<const StageSamplers> samplers, CounterRng& rng) {
  const auto n = static_cast<std::size_t>(config.n_turbines);
  if (samplers.size() != n) throw ValidationError("one sampler triple per stage required");
  const double power_scale = 2.0 * config.rho * config.area;

  Trajectory t;
  t.states.resize(n + 1);
  t.controls.resize(n);
  t.disk_velocities.resize(n);
  t.powers.resize(n);
  t.states[0] = config.x0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = t.states[k];
    const double a = samplers[k].a(rng);
    const double b = samplers[k].b(rng);
    const double c = samplers[k].c(rng);
    const double u = policy.control(static_cast<int>(k), x);
    const double y = x - u;
    t.controls[k] = u;
    t.disk_velocities[k] = y;
    t.powers[k] = power_scale * y * y * u;
    double next = a * x + b * u + c;
    if (next < 0.0) {
      next = 0.0;
      ++t.clamped_state_events;
    }
    t.states[k + 1] = next;
  }
  return t;
}

SimulationReport estimate_expected_power(const CascadeConfig& config, const Policy& policy,
                                         std::int64_t n_samples, std::uint64_t seed,
                                         Family family, Execution exec) {
  config.validate();
  policy.check_stages(config.n_turbines);
  if (n_samples < 1) throw ValidationError("n_samples must be at least 1");
  const auto samplers = build_samplers(config, family);
  const auto n = static_cast<std::size_t>(config.n_turbines);
  const double free_power_scale = 0.5 * config.rho * config.area;

  if (exec == Execution::Serial) {
    Accumulator acc(n);
    for (std::int64_t i = 0; i < n_samples; ++i) {
      CounterRng rng(seed, static_cast<std::uint64_t>(i));
      acc.add(rollout(config, policy, samplers, rng), free_power_scale);
    }
    return finish(acc, seed, n);
  }

  const std::int64_t n_blocks = (n_samples + kBlockSize - 1) / kBlockSize;
  std::vector<Accumulator> blocks(static_cast<std::size_t>(n_blocks), Accumulator(n));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t blk = 0; blk < n_blocks; ++blk) {
    auto& acc = blocks[static_cast<std::size_t>(blk)];
    const std::int64_t end = std::min(n_samples, (blk + 1) * kBlockSize);
    for (std::int64_t i = blk * kBlockSize; i < end; ++i) {
      CounterRng rng(seed, static_cast<std::uint64_t>(i));
      acc.add(rollout(config, policy, samplers, rng), free_power_scale);
    }
  }
  Accumulator total(n);
  for (const auto& blk : blocks) total.merge(blk);
  return finish(total, seed, n);
}

std::vector<PolicyComparisonRow> compare_policies(const CascadeConfig& config,
                                                  const std::vector<NamedPolicy>& policies,
                                                  std::int64_t n_samples, std::uint64_t seed,
                                                  Family family, Execution exec) {
  if (policies.size() < 2) throw ValidationError("compare_policies needs at least two policies");
  std::vector<PolicyComparisonRow> rows;
  rows.reserve(policies.size());
  for (const auto& p : policies) {
    rows.push_back({p.name, estimate_expected_power(config, p.policy, n_samples, seed, family,
                                                    exec)});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& l, const auto& r) {
    return l.report.mean_total_power > r.report.mean_total_power;
  });
  return rows;
}

double pooled_std_error(const SimulationReport& lhs, const SimulationReport& rhs) {
  return std::sqrt(lhs.std_error * lhs.std_error + rhs.std_error * rhs.std_error);
}

}  // namespace sadm
