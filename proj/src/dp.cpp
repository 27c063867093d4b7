#include "sadm/dp.hpp"

#include "quadratic.hpp"

#include <cmath>
#include <string>

namespace sadm {

namespace {

constexpr double kLeadingTolerance = 1e-10;

// g'(psi) = lead psi^2 + 2 half_linear psi + constant
struct FirstOrderCondition {
  double lead;
  double half_linear;
  double constant;
};

FirstOrderCondition first_order_condition(double q, const MomentSet& a, const MomentSet& b) {
  return {3.0 * (q * b.raw3 + 1.0), 3.0 * q * b.raw2 * a.mean - 2.0,
          3.0 * q * a.raw2 * b.mean + 1.0};
}

void validate_moments(const MomentSet& m, const char* name) {
  if (!std::isfinite(m.mean) || !std::isfinite(m.raw2) || !std::isfinite(m.raw3) ||
      !(m.std_dev >= 0.0)) {
    throw ValidationError(std::string("invalid moments for ") + name);
  }
}

}  // namespace

StageNoise StageNoise::deterministic(double mu_a, double mu_b) {
  return {MomentSet::constant(mu_a), MomentSet::constant(mu_b), MomentSet::constant(0.0)};
}

void StageNoise::validate() const {
  validate_moments(a, "a");
  validate_moments(b, "b");
  validate_moments(c, "c");
  if (c.mean != 0.0) {
    throw ValidationError("additive noise c must have zero mean");
  }
}

CascadeConfig CascadeConfig::homogeneous(int n_turbines, const StageNoise& noise, double x0,
                                         double rho, double area) {
  CascadeConfig config;
  config.n_turbines = n_turbines;
  config.x0 = x0;
  config.rho = rho;
  config.area = area;
  config.stages.assign(n_turbines > 0 ? static_cast<std::size_t>(n_turbines) : 0, noise);
  return config;
}

void CascadeConfig::validate() const {
  if (n_turbines < 1) throw ValidationError("n_turbines must be positive");
  if (!(x0 > 0.0) || !std::isfinite(x0)) throw ValidationError("x0 must be positive");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ValidationError("rho must be positive");
  if (!(area > 0.0) || !std::isfinite(area)) throw ValidationError("area must be positive");
  if (stages.size() != static_cast<std::size_t>(n_turbines)) {
    throw ValidationError("stages length " + std::to_string(stages.size()) +
                          " does not match n_turbines " + std::to_string(n_turbines));
  }
  for (const auto& s : stages) s.validate();
}

bool CascadeConfig::has_additive_noise() const {
  for (const auto& s : stages) {
    if (s.has_additive()) return true;
  }
  return false;
}

std::string_view to_string(GainStatus status) {
  switch (status) {
    case GainStatus::Interior: return "Interior";
    case GainStatus::ClampedLow: return "ClampedLow";
    case GainStatus::ClampedHigh: return "ClampedHigh";
    case GainStatus::BoundaryFallback: return "BoundaryFallback";
  }
  return "Unknown";
}

GainStatus gain_status_from_string(std::string_view name) {
  if (name == "Interior") return GainStatus::Interior;
  if (name == "ClampedLow") return GainStatus::ClampedLow;
  if (name == "ClampedHigh") return GainStatus::ClampedHigh;
  if (name == "BoundaryFallback") return GainStatus::BoundaryFallback;
  throw ValidationError("unknown gain status '" + std::string(name) + "'");
}

CriticalPoint gain_unconstrained(double q_next, const MomentSet& a, const MomentSet& b) {
  const auto foc = first_order_condition(q_next, a, b);
  if (std::abs(foc.lead) < kLeadingTolerance) {
    return {CriticalKind::Linear, 0.0};
  }
  const double disc = foc.half_linear * foc.half_linear - foc.lead * foc.constant;
  if (disc < 0.0) {
    return {CriticalKind::NoInteriorCritical, 0.0};
  }
  const double psi = -(foc.half_linear + std::sqrt(disc)) / foc.lead;
  // g''(psi) = 2 (lead psi + half_linear); must not be positive at a maximum.
  const double curvature = 2.0 * (foc.lead * psi + foc.half_linear);
  if (!std::isfinite(psi) || curvature > 1e-12) {
    return {CriticalKind::NoInteriorCritical, 0.0};
  }
  return {CriticalKind::Root, psi};
}

double value_coefficient(double psi, double q_next, const MomentSet& a, const MomentSet& b) {
  const double one_minus = 1.0 - psi;
  return one_minus * one_minus * psi +
         q_next * (a.raw3 + b.raw3 * psi * psi * psi + 3.0 * b.raw2 * a.mean * psi * psi +
                   3.0 * a.raw2 * b.mean * psi);
}

ConstrainedGain constrain_gain(const CriticalPoint& candidate, double q_next,
                               const MomentSet& a, const MomentSet& b) {
  bool have_root = false;
  double root = 0.0;
  switch (candidate.kind) {
    case CriticalKind::Root:
      have_root = true;
      root = candidate.psi;
      break;
    case CriticalKind::Linear: {
      // g'(psi) = 2 half_linear psi + constant; a maximum needs half_linear < 0.
      const auto foc = first_order_condition(q_next, a, b);
      if (foc.half_linear < -kLeadingTolerance) {
        have_root = true;
        root = -foc.constant / (2.0 * foc.half_linear);
      }
      break;
    }
    case CriticalKind::NoInteriorCritical:
      break;
  }

  const double g_low = value_coefficient(0.0, q_next, a, b);
  const double g_high = value_coefficient(0.5, q_next, a, b);
  ConstrainedGain best = g_high > g_low ? ConstrainedGain{0.5, GainStatus::ClampedHigh}
                                        : ConstrainedGain{0.0, GainStatus::ClampedLow};
  const double g_best = std::max(g_low, g_high);

  if (have_root && root >= 0.0 && root <= 0.5 &&
      value_coefficient(root, q_next, a, b) >= g_best) {
    return {root, GainStatus::Interior};
  }
  // Without a usable maximizer a monotone objective is simply clamped to the
  // winning bound; only a genuine endpoint comparison counts as a fallback.
  if (!have_root) {
    const auto foc = first_order_condition(q_next, a, b);
    if (detail::derivative_changes_sign(foc.lead, foc.half_linear, foc.constant, 0.5,
                                        kLeadingTolerance)) {
      best.status = GainStatus::BoundaryFallback;
    }
  }
  return best;
}

PolicySolution solve_cascade(const CascadeConfig& config) {
  config.validate();
  if (config.has_additive_noise()) {
    throw ValidationError(
        "additive noise present: the linear/cubic recursion does not apply, use grid_dp_additive");
  }
  const auto n = static_cast<std::size_t>(config.n_turbines);
  PolicySolution solution;
  solution.gains.assign(n, 0.0);
  solution.clamped.assign(n, GainStatus::Interior);
  solution.coefficients.assign(n + 1, 0.0);

  for (std::size_t k = n; k-- > 0;) {
    const auto& stage = config.stages[k];
    const double q_next = solution.coefficients[k + 1];
    const auto chosen =
        constrain_gain(gain_unconstrained(q_next, stage.a, stage.b), q_next, stage.a, stage.b);
    solution.gains[k] = chosen.psi;
    solution.clamped[k] = chosen.status;
    solution.coefficients[k] = value_coefficient(chosen.psi, q_next, stage.a, stage.b);
  }
  return solution;
}

double max_power(double q0, double rho, double area, double x0) {
  if (!(rho > 0.0) || !(area > 0.0) || !(x0 > 0.0)) {
    throw ValidationError("rho, area and x0 must be positive");
  }
  return 2.0 * rho * area * q0 * x0 * x0 * x0;
}

}  // namespace sadm
