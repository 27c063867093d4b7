#include "sadm/additive.hpp"

#include "quadratic.hpp"

#include <algorithm>
#include <cmath>

namespace sadm {

namespace {

constexpr double kLeadingTolerance = 1e-10;

double stage_objective(double x, double u, double q_next, const StageNoise& noise) {
  const double y = x - u;
  return y * y * u + expected_cubic(x, u, noise, q_next);
}

struct Quadrature {
  std::vector<Atom> a, b, c;
};

Quadrature stage_quadrature(const StageNoise& noise) {
  return {moment_matched_atoms(noise.a), moment_matched_atoms(noise.b),
          moment_matched_atoms(noise.c)};
}

double expected_value(const ValueInterpolant& next, const Quadrature& quad, double x, double u) {
  double total = 0.0;
  for (const auto& a : quad.a) {
    for (const auto& b : quad.b) {
      const double ab = a.value * x + b.value * u;
      const double w_ab = a.weight * b.weight;
      for (const auto& c : quad.c) {
        total += w_ab * c.weight * next(ab + c.value);
      }
    }
  }
  return total;
}

struct GridPoint {
  double value;
  double policy;
};

GridPoint maximize_at(double x, int n_u, const ValueInterpolant& next, const Quadrature& quad) {
  if (x <= 0.0) {
    return {expected_value(next, quad, 0.0, 0.0), 0.0};
  }
  const double du = 0.5 * x / (n_u - 1);
  GridPoint best{-INFINITY, 0.0};
  for (int j = 0; j < n_u; ++j) {
    const double u = du * j;
    const double y = x - u;
    const double value = y * y * u + expected_value(next, quad, x, u);
    if (value > best.value) best = {value, u};
  }
  return best;
}

}  // namespace

double expected_cubic(double x, double u, const StageNoise& noise, double q) {
  if (noise.c.mean != 0.0) {
    throw ValidationError("additive noise c must have zero mean");
  }
  const auto& a = noise.a;
  const auto& b = noise.b;
  const auto& c = noise.c;
  return q * (a.raw3 * x * x * x + b.raw3 * u * u * u + 3.0 * a.raw2 * b.mean * x * x * u +
              3.0 * b.raw2 * a.mean * x * u * u + 3.0 * c.raw2 * a.mean * x +
              3.0 * c.raw2 * b.mean * u + c.raw3);
}

AdditivePolicyParams penultimate_params(double q_next, const StageNoise& noise) {
  const double lead = 3.0 * (q_next * noise.b.raw3 + 1.0);
  if (std::abs(lead) < kLeadingTolerance) {
    throw ValidationError("first-order condition is linear; no closed-form square-root policy");
  }
  const double half_linear = 3.0 * q_next * noise.b.raw2 * noise.a.mean - 2.0;
  const double quad = 3.0 * q_next * noise.a.raw2 * noise.b.mean + 1.0;
  const double offset = 3.0 * q_next * noise.c.raw2 * noise.b.mean;
  // u = -(half_linear x + sqrt(half_linear^2 x^2 - lead (quad x^2 + offset))) / lead
  AdditivePolicyParams p;
  p.q_next = q_next;
  p.delta = -half_linear / lead;
  p.beta = (half_linear * half_linear - lead * quad) / (lead * lead);
  p.alpha = -offset / lead;
  p.sqrt_sign = lead > 0.0 ? -1.0 : 1.0;
  return p;
}

ControlDecision penultimate_decision(double x, double q_next, const StageNoise& noise) {
  noise.validate();
  if (!(x >= 0.0)) throw ValidationError("state must be non-negative");
  if (x == 0.0) return {0.0, GainStatus::Interior};

  const double lead = 3.0 * (q_next * noise.b.raw3 + 1.0);
  const double delta = (3.0 * q_next * noise.b.raw2 * noise.a.mean - 2.0) * x;
  const double rest = (3.0 * q_next * noise.a.raw2 * noise.b.mean + 1.0) * x * x +
                      3.0 * q_next * noise.c.raw2 * noise.b.mean;

  bool have_root = false;
  double root = 0.0;
  if (std::abs(lead) < kLeadingTolerance) {
    // h'(u) = 2 delta u + rest
    if (delta < -kLeadingTolerance) {
      have_root = true;
      root = -rest / (2.0 * delta);
    }
  } else {
    const double disc = delta * delta - lead * rest;
    if (disc >= 0.0) {
      root = -(delta + std::sqrt(disc)) / lead;
      have_root = std::isfinite(root) && (lead * root + delta) <= 1e-12 * x;
    }
  }

  const double hi = 0.5 * x;
  const double h_low = stage_objective(x, 0.0, q_next, noise);
  const double h_high = stage_objective(x, hi, q_next, noise);
  ControlDecision best = h_high > h_low ? ControlDecision{hi, GainStatus::ClampedHigh}
                                        : ControlDecision{0.0, GainStatus::ClampedLow};
  const double h_best = std::max(h_low, h_high);
  if (have_root && root >= 0.0 && root <= hi &&
      stage_objective(x, root, q_next, noise) >= h_best) {
    return {root, GainStatus::Interior};
  }
  if (!have_root && detail::derivative_changes_sign(lead, delta, rest, hi, kLeadingTolerance)) {
    best.status = GainStatus::BoundaryFallback;
  }
  return best;
}

double GridValueTable::policy_at(int k, double x) const {
  if (k < 0 || k >= n_stages()) throw ValidationError("stage index out of range");
  if (x <= 0.0) return 0.0;
  const auto& pol = policies[static_cast<std::size_t>(k)];
  double u;
  if (x >= x_max()) {
    u = x * (pol.back() / x_max());
  } else {
    const double t = x / x_step();
    const auto i = std::min(static_cast<std::size_t>(t), x_grid.size() - 2);
    const double w = t - static_cast<double>(i);
    u = (1.0 - w) * pol[i] + w * pol[i + 1];
  }
  return std::clamp(u, 0.0, 0.5 * x);
}

ValueInterpolant::ValueInterpolant(const std::vector<double>& x_grid,
                                   const std::vector<double>& values)
    : x_grid_(&x_grid), residual_(values.size()) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const double x3 = x_grid[i] * x_grid[i] * x_grid[i];
    num += values[i] * x3;
    den += x3 * x3;
  }
  q_ = den > 0.0 ? num / den : 0.0;
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const double x = x_grid[i];
    residual_[i] = values[i] - q_ * x * x * x;
  }
}

double ValueInterpolant::operator()(double s) const {
  const auto& xs = *x_grid_;
  if (s <= 0.0) return residual_.front();
  const double cubic = q_ * s * s * s;
  if (s >= xs.back()) return cubic + residual_.back();
  const double t = s / (xs[1] - xs[0]);
  const auto i = std::min(static_cast<std::size_t>(t), xs.size() - 2);
  const double w = t - static_cast<double>(i);
  return cubic + (1.0 - w) * residual_[i] + w * residual_[i + 1];
}

GridValueTable grid_dp_additive(const CascadeConfig& config, double x_max, int n_x, int n_u,
                                Execution exec) {
  config.validate();
  if (!(x_max > 0.0) || !std::isfinite(x_max)) throw ValidationError("x_max must be positive");
  if (n_x < 2 || n_u < 2) throw ValidationError("n_x and n_u must be at least 2");

  const auto n = static_cast<std::size_t>(config.n_turbines);
  const auto nx = static_cast<std::size_t>(n_x);
  GridValueTable table;
  table.n_u = n_u;
  table.x_grid.resize(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    table.x_grid[i] = x_max * static_cast<double>(i) / static_cast<double>(nx - 1);
  }
  table.values.assign(n + 1, std::vector<double>(nx, 0.0));
  table.policies.assign(n, std::vector<double>(nx, 0.0));

  for (std::size_t k = n; k-- > 0;) {
    const ValueInterpolant next(table.x_grid, table.values[k + 1]);
    const auto quad = stage_quadrature(config.stages[k]);
    auto& values = table.values[k];
    auto& policies = table.policies[k];
    const auto& xs = table.x_grid;

    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(nx); ++i) {
        const auto best = maximize_at(xs[static_cast<std::size_t>(i)], n_u, next, quad);
        values[static_cast<std::size_t>(i)] = best.value;
        policies[static_cast<std::size_t>(i)] = best.policy;
      }
    } else {
      for (std::size_t i = 0; i < nx; ++i) {
        const auto best = maximize_at(xs[i], n_u, next, quad);
        values[i] = best.value;
        policies[i] = best.policy;
      }
    }
  }
  return table;
}

}  // namespace sadm
