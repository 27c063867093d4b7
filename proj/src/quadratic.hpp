#pragma once

#include <cmath>

namespace sadm::detail {

/// True when lead t^2 + 2 half t + c has a root strictly inside (0, hi), i.e.
/// the objective whose derivative it is is not monotone there.
inline bool derivative_changes_sign(double lead, double half, double c, double hi,
                                    double lead_tolerance) {
  const auto inside = [hi](double t) { return std::isfinite(t) && t > 0.0 && t < hi; };
  if (std::abs(lead) < lead_tolerance) {
    return half != 0.0 && inside(-c / (2.0 * half));
  }
  const double disc = half * half - lead * c;
  if (disc <= 0.0) return false;
  const double root = std::sqrt(disc);
  return inside((-half + root) / lead) || inside((-half - root) / lead);
}

}  // namespace sadm::detail
