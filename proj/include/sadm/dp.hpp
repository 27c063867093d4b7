#pragma once

#include <string_view>
#include <vector>

#include "sadm/moments.hpp"

namespace sadm {

/// Moments of the random wake coefficients of one cascade stage:
/// x_{k+1} = a x_k + b u_k + c, with c zero-mean.
struct StageNoise {
  MomentSet a;
  MomentSet b;
  MomentSet c;

  /// Noise-free stage with E[a] = mu_a, E[b] = mu_b and no additive term.
  static StageNoise deterministic(double mu_a = 1.0, double mu_b = -2.0);

  bool has_additive() const { return c.raw2 != 0.0; }
  void validate() const;
};

/// A one-dimensional cascade of turbines; stage k = 0 is furthest upstream.
struct CascadeConfig {
  int n_turbines = 1;
  double x0 = 1.0;      // free-stream velocity, m/s
  double rho = 1.225;   // air density, kg/m^3
  double area = 1.0;    // rotor swept area, m^2
  std::vector<StageNoise> stages;

  static CascadeConfig homogeneous(int n_turbines, const StageNoise& noise,
                                   double x0 = 1.0, double rho = 1.225,
                                   double area = 1.0);

  void validate() const;
  bool has_additive_noise() const;
};

enum class GainStatus { Interior, ClampedLow, ClampedHigh, BoundaryFallback };

std::string_view to_string(GainStatus status);
GainStatus gain_status_from_string(std::string_view name);

enum class CriticalKind {
  Root,                // maximizing root of the first-order condition
  NoInteriorCritical,  // negative discriminant or root is not a maximizer
  Linear,              // leading coefficient vanished; quadratic became linear
};

struct CriticalPoint {
  CriticalKind kind = CriticalKind::NoInteriorCritical;
  double psi = 0.0;  // meaningful for Root only
};

/// Closed-form stationary gain of the scale-free stage objective
///   g(psi) = (1-psi)^2 psi + q_next E[(a + b psi)^3].
/// Degenerate cases are signalled through `kind` instead of a number.
CriticalPoint gain_unconstrained(double q_next, const MomentSet& a, const MomentSet& b);

/// g(psi) above. Valid for any psi, which is what lets a clamped gain feed the
/// next step of the recursion.
double value_coefficient(double psi, double q_next, const MomentSet& a, const MomentSet& b);

struct ConstrainedGain {
  double psi = 0.0;
  GainStatus status = GainStatus::Interior;
};

/// Picks the best of {feasible interior root, 0, 1/2} under g.
ConstrainedGain constrain_gain(const CriticalPoint& candidate, double q_next,
                               const MomentSet& a, const MomentSet& b);

/// Optimal linear gains psi_k and cubic value coefficients Q_k.
struct PolicySolution {
  std::vector<double> gains;          // N entries, u_k = psi_k x_k
  std::vector<double> coefficients;   // N + 1 entries, Q_N = 0
  std::vector<GainStatus> clamped;    // N entries

  double q0() const { return coefficients.front(); }
};

/// Backward recursion from Q_N = 0. Requires multiplicative-only noise;
/// configs with additive noise throw ValidationError (use grid_dp_additive).
PolicySolution solve_cascade(const CascadeConfig& config);

/// 2 rho A Q0 x0^3, watts.
double max_power(double q0, double rho, double area, double x0);

/// Optimal efficiency of the sub-array starting at turbine l: 4 Q_l.
inline double subarray_efficiency(double q_l) { return 4.0 * q_l; }

}  // namespace sadm
