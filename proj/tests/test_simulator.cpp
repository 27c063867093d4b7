#include <gtest/gtest.h>

#include <cmath>

#include <omp.h>

#include "sadm/simulator.hpp"
#include "test_support.hpp"

namespace sadm {
namespace {

using testing::noise;

const StageNoise kDet = StageNoise::deterministic(1.0, -2.0);

CascadeConfig unit_config(int n, const StageNoise& s) {
  return CascadeConfig::homogeneous(n, s, 1.0, 1.0, 1.0);
}

Trajectory run_once(const CascadeConfig& config, const Policy& policy, std::uint64_t seed = 1) {
  const auto samplers = build_samplers(config, Family::TwoPointDiscrete);
  CounterRng rng(seed);
  return rollout(config, policy, samplers, rng);
}

TEST(Rollout, BetzSingleTurbine) {
  const auto t = run_once(unit_config(1, kDet), Policy::betz_greedy());
  EXPECT_NEAR(t.powers[0], 8.0 / 27.0, 1e-15);
  EXPECT_NEAR(t.states[1], 1.0 / 3.0, 1e-15);
}

TEST(Rollout, DeterministicTwoTurbinesGiveQ0) {
  const auto t = run_once(unit_config(2, kDet), Policy::linear_gains({0.2, 1.0 / 3.0}));
  EXPECT_NEAR(t.total_power() / 2.0, 4.0 / 25.0, 1e-15);
}

TEST(Rollout, ZeroGainLeavesWindUntouched) {
  const auto t = run_once(unit_config(5, kDet), Policy::linear_gains(std::vector<double>(5, 0.0)));
  for (double x : t.states) EXPECT_EQ(x, 1.0);
  for (double p : t.powers) EXPECT_EQ(p, 0.0);
}

TEST(Rollout, PerStageIdentities) {
  const auto config = CascadeConfig::homogeneous(8, noise(1.0, 0.2, 0.3, -2.0, 0.4, -0.2, 0.1),
                                                 8.0, 1.225, 100.0);
  const auto t = run_once(config, Policy::linear_gains(solve_cascade(unit_config(8, kDet)).gains), 77);
  double stage_cost_sum = 0.0;
  for (int k = 0; k < 8; ++k) {
    EXPECT_EQ(t.disk_velocities[k], t.states[k] - t.controls[k]);
    EXPECT_DOUBLE_EQ(t.powers[k], 2 * 1.225 * 100.0 * t.disk_velocities[k] *
                                      t.disk_velocities[k] * t.controls[k]);
    EXPECT_GE(t.controls[k], 0.0);
    EXPECT_LE(t.controls[k], 0.5 * t.states[k]);
    const double y = t.states[k] - t.controls[k];
    stage_cost_sum += y * y * t.controls[k];
  }
  EXPECT_NEAR(t.total_power(), 2 * 1.225 * 100.0 * stage_cost_sum, 1e-9);
}

TEST(Policy, ClipsUserGainsAndChecksLength) {
  const auto p = Policy::linear_gains({-0.2, 0.9});
  EXPECT_EQ(p.gains()[0], 0.0);
  EXPECT_EQ(p.gains()[1], 0.5);
  EXPECT_THROW(p.check_stages(3), ValidationError);
  EXPECT_THROW(estimate_expected_power(unit_config(3, kDet), p, 10, 0), ValidationError);
}

TEST(EstimateExpectedPower, DeterministicIsExact) {
  const auto config = unit_config(3, kDet);
  const auto sol = solve_cascade(config);
  const auto report =
      estimate_expected_power(config, Policy::linear_gains(sol.gains), 5000, 3);
  EXPECT_NEAR(report.mean_total_power, max_power(sol.q0(), 1.0, 1.0, 1.0), 1e-15);
  EXPECT_EQ(report.std_error, 0.0);
  EXPECT_EQ(report.negative_state_fraction, 0.0);
  // deterministic ratio estimator hits 4 Q_l up to summation rounding
  for (int l = 0; l < 3; ++l) {
    EXPECT_NEAR(report.per_subarray_efficiency[l], subarray_efficiency(sol.coefficients[l]),
                1e-12);
  }
}

TEST(EstimateExpectedPower, MatchesAnalyticExpectation) {
  const auto config = CascadeConfig::homogeneous(10, noise(1.0, 0.0, 0.0, -2.0, 0.4, 0.0));
  const auto sol = solve_cascade(config);
  const auto report = estimate_expected_power(config, Policy::linear_gains(sol.gains), 200'000, 9);
  EXPECT_LT(report.negative_state_fraction, 1e-4);
  const double analytic = max_power(sol.q0(), config.rho, config.area, config.x0);
  EXPECT_LE(std::abs(report.mean_total_power - analytic), 4.0 * report.std_error);
  for (int l = 0; l < 10; ++l) {
    EXPECT_NEAR(report.per_subarray_efficiency[l], subarray_efficiency(sol.coefficients[l]), 5e-3);
  }
}

TEST(EstimateExpectedPower, StdErrorShrinksLikeRootN) {
  const auto config = CascadeConfig::homogeneous(5, noise(1.0, 0.0, 0.0, -2.0, 0.3, 0.0));
  const auto policy = Policy::linear_gains(solve_cascade(config).gains);
  const auto small = estimate_expected_power(config, policy, 20'000, 5);
  const auto large = estimate_expected_power(config, policy, 80'000, 5);
  EXPECT_NEAR(small.std_error / large.std_error, 2.0, 0.1);
}

TEST(EstimateExpectedPower, SameSeedBitIdenticalAnyThreadCount) {
  const auto config = CascadeConfig::homogeneous(6, noise(0.99, 0.1, 0.2, -2.0, 0.3, 0.0));
  const auto policy = Policy::linear_gains(solve_cascade(config).gains);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = estimate_expected_power(config, policy, 30'000, 11);
  omp_set_num_threads(4);
  const auto four = estimate_expected_power(config, policy, 30'000, 11);
  omp_set_num_threads(saved);
  EXPECT_EQ(one.mean_total_power, four.mean_total_power);
  EXPECT_EQ(one.std_error, four.std_error);
  EXPECT_EQ(one.per_subarray_efficiency, four.per_subarray_efficiency);
  const auto again = estimate_expected_power(config, policy, 30'000, 11);
  EXPECT_EQ(one.mean_total_power, again.mean_total_power);
  const auto other_seed = estimate_expected_power(config, policy, 30'000, 12);
  EXPECT_NE(one.mean_total_power, other_seed.mean_total_power);
}

TEST(EstimateExpectedPower, SerialReferenceAgrees) {
  const auto config = CascadeConfig::homogeneous(6, noise(0.99, 0.1, 0.2, -2.0, 0.3, 0.0, 0.05));
  const auto policy = Policy::betz_greedy();
  const auto serial = estimate_expected_power(config, policy, 20'000, 4,
                                              Family::TwoPointDiscrete, Execution::Serial);
  const auto parallel = estimate_expected_power(config, policy, 20'000, 4);
  EXPECT_NEAR(serial.mean_total_power, parallel.mean_total_power,
              1e-12 * serial.mean_total_power);
  EXPECT_NEAR(serial.std_error, parallel.std_error, 1e-9 * serial.std_error);
  EXPECT_EQ(serial.negative_state_fraction, parallel.negative_state_fraction);
}

TEST(EstimateExpectedPower, ReportsNegativeStates) {
  // b in {-1, -3} with a Betz-greedy control drives x below zero half the time.
  const auto config = CascadeConfig::homogeneous(4, noise(1.0, 0.0, 0.0, -2.0, 1.0, 0.0));
  const auto report = estimate_expected_power(config, Policy::linear_gains({0.45, 0.45, 0.45, 0.45}),
                                              10'000, 2);
  EXPECT_GT(report.negative_state_fraction, 0.1);
  EXPECT_LE(report.negative_state_fraction, 1.0);
}

TEST(EstimateExpectedPower, NormalFamily) {
  const auto config = CascadeConfig::homogeneous(4, noise(1.0, 0.0, 0.0, -2.0, 0.2, 0.0));
  const auto sol = solve_cascade(config);
  const auto report = estimate_expected_power(config, Policy::linear_gains(sol.gains), 100'000, 8,
                                              Family::Normal);
  EXPECT_LE(std::abs(report.mean_total_power - max_power(sol.q0(), config.rho, config.area, 1.0)),
            4.0 * report.std_error);
  EXPECT_THROW(estimate_expected_power(CascadeConfig::homogeneous(2, noise(1, 0, 0, -2, 0.2, 0.5)),
                                       Policy::betz_greedy(), 10, 0, Family::Normal),
               ValidationError);
}

TEST(ComparePolicies, DeterministicDpBeatsGreedy) {
  const auto config = unit_config(2, kDet);
  const auto rows = compare_policies(
      config, {{"betz", Policy::betz_greedy()}, {"optimal", Policy::linear_gains({0.2, 1.0 / 3.0})}},
      10, 0);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].name, "optimal");
  EXPECT_NEAR(rows[0].report.mean_total_power / 2.0, 4.0 / 25.0, 1e-15);
  // greedy: 4/27 upstream, then 4/27 (1/3)^3 downstream
  EXPECT_NEAR(rows[1].report.mean_total_power / 2.0, 4.0 / 27.0 * (1.0 + 1.0 / 27.0), 1e-15);
}

TEST(ComparePolicies, OptimalDominatesUnderCommonRandomNumbers) {
  for (const auto& s : {noise(1.0, 0, 0, -2.0, 0.4, 0), noise(0.99, 0.1, 0, -2.0, 0, 0),
                        noise(0.99, 0.05, 0.5, -2.0, 0.2, -0.5)}) {
    const auto config = CascadeConfig::homogeneous(10, s);
    const auto rows = compare_policies(
        config,
        {{"optimal", Policy::linear_gains(solve_cascade(config).gains)},
         {"betz", Policy::betz_greedy()}},
        50'000, 21);
    const auto& opt = rows[0].name == "optimal" ? rows[0] : rows[1];
    const auto& betz = rows[0].name == "optimal" ? rows[1] : rows[0];
    EXPECT_GE(opt.report.mean_total_power,
              betz.report.mean_total_power - 4.0 * pooled_std_error(opt.report, betz.report));
  }
}

TEST(ComparePolicies, DuplicatedPolicyGivesIdenticalRows) {
  const auto config = CascadeConfig::homogeneous(5, noise(1.0, 0.1, 0, -2.0, 0.3, 0));
  const auto rows =
      compare_policies(config, {{"a", Policy::betz_greedy()}, {"b", Policy::betz_greedy()}}, 5000, 1);
  EXPECT_EQ(rows[0].report.mean_total_power, rows[1].report.mean_total_power);
  EXPECT_EQ(rows[0].report.std_error, rows[1].report.std_error);
  EXPECT_THROW(compare_policies(config, {{"a", Policy::betz_greedy()}}, 10, 1), ValidationError);
}

TEST(ComparePolicies, TabulatedPolicyTracksLinearGains) {
  const auto config = CascadeConfig::homogeneous(4, noise(1.0, 0, 0, -2.0, 0.3, 0));
  const auto table = grid_dp_additive(config, 1.5, 121, 1001);
  const auto rows = compare_policies(
      config,
      {{"optimal", Policy::linear_gains(solve_cascade(config).gains)},
       {"grid", Policy::tabulated(table)}},
      20'000, 5);
  EXPECT_NEAR(rows[0].report.mean_total_power, rows[1].report.mean_total_power,
              1e-4 * rows[0].report.mean_total_power);
}

}  // namespace
}  // namespace sadm
