#include "sadm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sadm {

namespace {

struct ScanBest {
  double value = -std::numeric_limits<double>::infinity();
  long index = 0;
};

// Ties resolve to the smaller index so serial and parallel scans agree.
void keep_better(ScanBest& best, double value, long index) {
  if (value > best.value || (value == best.value && index < best.index)) {
    best = {value, index};
  }
}

template <class F>
double golden_section_maximize(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  while (hi - lo > tol) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double oracle_stage_objective(double psi, double q_next, const StageNoise& noise) {
  const auto atoms_a = moment_matched_atoms(noise.a);
  const auto atoms_b = moment_matched_atoms(noise.b);
  double cubic = 0.0;
  for (const auto& a : atoms_a) {
    for (const auto& b : atoms_b) {
      const double next = a.value + b.value * psi;
      cubic += a.weight * b.weight * next * next * next;
    }
  }
  return (1.0 - psi) * (1.0 - psi) * psi + q_next * cubic;
}

double grid_argmax_stage(double q_next, const StageNoise& noise, int n_u, Execution exec) {
  if (n_u < 1) throw ValidationError("n_u must be positive");
  const auto atoms_a = moment_matched_atoms(noise.a);
  const auto atoms_b = moment_matched_atoms(noise.b);
  auto objective = [&](double psi) {
    double cubic = 0.0;
    for (const auto& a : atoms_a) {
      for (const auto& b : atoms_b) {
        const double next = a.value + b.value * psi;
        cubic += a.weight * b.weight * next * next * next;
      }
    }
    return (1.0 - psi) * (1.0 - psi) * psi + q_next * cubic;
  };

  const double step = 0.5 / n_u;
  ScanBest best;
  if (exec == Execution::Parallel) {
#pragma omp parallel
    {
      ScanBest local;
#pragma omp for schedule(static) nowait
      for (long j = 0; j <= n_u; ++j) {
        keep_better(local, objective(step * static_cast<double>(j)), j);
      }
#pragma omp critical(sadm_oracle_scan)
      keep_better(best, local.value, local.index);
    }
  } else {
    for (long j = 0; j <= n_u; ++j) {
      keep_better(best, objective(step * static_cast<double>(j)), j);
    }
  }

  const double psi_grid = step * static_cast<double>(best.index);
  const double lo = std::max(0.0, psi_grid - step);
  const double hi = std::min(0.5, psi_grid + step);
  const double psi_refined = golden_section_maximize(objective, lo, hi, 1e-13);
  return objective(psi_refined) > best.value ? psi_refined : psi_grid;
}

VerificationReport verify_policy(const CascadeConfig& config, const PolicySolution& solution,
                                 int n_u, Execution exec) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.n_turbines);
  if (solution.gains.size() != n || solution.clamped.size() != n) {
    throw ValidationError("solution has " + std::to_string(solution.gains.size()) +
                          " gains for a cascade of " + std::to_string(n) + " turbines");
  }
  VerificationReport report;
  report.grid_points = n_u;
  report.grid_spacing = 0.5 / n_u;
  report.tolerance = 2.0 * report.grid_spacing;
  report.stages.resize(n);

  double q_next = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const auto& noise = config.stages[k];
    const double psi_oracle = grid_argmax_stage(q_next, noise, n_u, exec);
    auto& row = report.stages[k];
    row.stage = static_cast<int>(k);
    row.analytic_psi = solution.gains[k];
    row.oracle_psi = psi_oracle;
    row.gap = std::abs(row.analytic_psi - psi_oracle);
    row.status = solution.clamped[k];
    row.pass = row.gap <= report.tolerance;
    q_next = value_coefficient(psi_oracle, q_next, noise.a, noise.b);
  }

  report.pass = true;
  for (const auto& row : report.stages) {
    report.max_gap = std::max(report.max_gap, row.gap);
    report.pass = report.pass && row.pass;
  }
  return report;
}

}  // namespace sadm
