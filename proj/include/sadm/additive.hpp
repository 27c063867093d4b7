#pragma once

#include <vector>

#include "sadm/dp.hpp"
#include "sadm/execution.hpp"

namespace sadm {

/// q E[(a x + b u + c)^3] from raw moments, with E[c] = 0.
double expected_cubic(double x, double u, const StageNoise& noise, double q);

/// Coefficients of the closed-form stationary control one stage ahead of a
/// cubic value function q_next x^3:
///   u(x) = delta x + sqrt_sign * sqrt(alpha + beta x^2).
/// alpha vanishes without additive noise, leaving a linear policy.
struct AdditivePolicyParams {
  double delta = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double sqrt_sign = 1.0;
  double q_next = 0.0;
};

/// Throws ValidationError when the quadratic first-order condition degenerates.
AdditivePolicyParams penultimate_params(double q_next, const StageNoise& noise);

struct ControlDecision {
  double u = 0.0;
  GainStatus status = GainStatus::Interior;
};

/// Maximizer over u in [0, x/2] of (x-u)^2 u + expected_cubic(x, u, noise, q_next),
/// starting from the closed-form root and falling back to the interval ends.
ControlDecision penultimate_decision(double x, double q_next, const StageNoise& noise);

inline double penultimate_policy(double x, double q_next, const StageNoise& noise) {
  return penultimate_decision(x, q_next, noise).u;
}

/// Tabulated value functions and policies from numeric backward induction.
struct GridValueTable {
  std::vector<double> x_grid;                 // uniform on [0, x_max], includes 0
  std::vector<std::vector<double>> values;    // N + 1 stages, values[N] = 0
  std::vector<std::vector<double>> policies;  // N stages, policies[k][i] in [0, x_i/2]
  int n_u = 0;

  int n_stages() const { return static_cast<int>(policies.size()); }
  double x_max() const { return x_grid.back(); }
  double x_step() const { return x_grid[1] - x_grid[0]; }
  /// Spacing of the control grid searched at state x.
  double u_step(double x) const { return 0.5 * x / (n_u - 1); }

  /// Linear interpolation of policies[k]; beyond x_max the last control
  /// fraction u/x is held. Result lies in [0, x/2].
  double policy_at(int k, double x) const;
};

/// Smooth-plus-residual interpolant of a tabulated value function:
/// v(s) = q s^3 + r(s), q a least-squares cubic fit and r a piecewise-linear
/// residual held constant beyond the grid. States below 0 read v(0).
class ValueInterpolant {
 public:
  ValueInterpolant(const std::vector<double>& x_grid, const std::vector<double>& values);

  double operator()(double s) const;
  double cubic_coefficient() const { return q_; }

 private:
  const std::vector<double>* x_grid_;
  std::vector<double> residual_;
  double q_ = 0.0;
};

/// Backward induction on a uniform state grid with an n_u-point control grid
/// on [0, x/2]. Expectations over (a, b, c) use the moment-matched two-point
/// atoms of each variable, exact for cubic value functions.
GridValueTable grid_dp_additive(const CascadeConfig& config, double x_max, int n_x, int n_u,
                                Execution exec = Execution::Parallel);

}  // namespace sadm
