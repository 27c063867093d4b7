// Serial reference vs OpenMP path for the three heavy kernels.
// Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include <cmath>

#include "sadm/additive.hpp"
#include "sadm/oracle.hpp"
#include "sadm/simulator.hpp"

namespace {

using sadm::Execution;

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

sadm::StageNoise noisy(double sigma_c = 0.0) {
  return {sadm::central_to_raw(1.0, 0.1, 0.0), sadm::central_to_raw(-2.0, 0.3, 0.2),
          sadm::central_to_raw(0.0, sigma_c, 0.0)};
}

void BM_OracleScan(benchmark::State& state) {
  const auto n = noisy();
  for (auto _ : state) {
    benchmark::DoNotOptimize(sadm::grid_argmax_stage(4.0 / 27.0, n, 1'000'000, mode(state)));
  }
  state.SetItemsProcessed(state.iterations() * 1'000'000);
}

void BM_MonteCarlo(benchmark::State& state) {
  const auto config = sadm::CascadeConfig::homogeneous(10, noisy());
  const auto policy = sadm::Policy::linear_gains(sadm::solve_cascade(config).gains);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sadm::estimate_expected_power(config, policy, 200'000, 7,
                                      sadm::Family::TwoPointDiscrete, mode(state)));
  }
  state.SetItemsProcessed(state.iterations() * 200'000);
}

void BM_GridDp(benchmark::State& state) {
  const auto config = sadm::CascadeConfig::homogeneous(3, noisy(std::sqrt(0.1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sadm::grid_dp_additive(config, 1.5, 200, 2000, mode(state)));
  }
}

BENCHMARK(BM_OracleScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridDp)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
