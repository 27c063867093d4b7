#pragma once

#include <vector>

#include "sadm/dp.hpp"
#include "sadm/execution.hpp"

namespace sadm {

/// Derivative-free argmax of the scale-free stage objective over psi in [0, 1/2].
///
/// The expectation E[(a + b psi)^3] is taken over the moment-matched two-point
/// atoms of a and b rather than the raw-moment expansion, so this path shares
/// no algebra with the closed-form gain. The n_u + 1 point scan is refined by
/// golden-section search on the bracketing cells.
double grid_argmax_stage(double q_next, const StageNoise& noise, int n_u,
                         Execution exec = Execution::Parallel);

/// Scale-free objective evaluated by the oracle (exposed for tests).
double oracle_stage_objective(double psi, double q_next, const StageNoise& noise);

struct StageVerification {
  int stage = 0;
  double analytic_psi = 0.0;
  double oracle_psi = 0.0;
  double gap = 0.0;
  GainStatus status = GainStatus::Interior;
  bool pass = false;
};

struct VerificationReport {
  std::vector<StageVerification> stages;
  double max_gap = 0.0;
  bool pass = false;
  int grid_points = 0;
  double grid_spacing = 0.0;
  double tolerance = 0.0;  // 2 x grid_spacing
};

/// Replays the backward recursion with grid_argmax_stage, carrying the
/// oracle's own Q chain, and compares gains stage by stage.
VerificationReport verify_policy(const CascadeConfig& config, const PolicySolution& solution,
                                 int n_u, Execution exec = Execution::Parallel);

}  // namespace sadm
