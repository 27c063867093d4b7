#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "sadm/error.hpp"
#include "sadm/rng.hpp"

namespace sadm {

/// First three moments of a scalar random variable, held in both central
/// (mean, std_dev, skewness) and raw (mean, E[X^2], E[X^3]) form.
struct MomentSet {
  double mean = 0.0;
  double std_dev = 0.0;
  double skewness = 0.0;
  double raw2 = 0.0;
  double raw3 = 0.0;

  static MomentSet constant(double value);
  bool degenerate() const { return std_dev == 0.0; }
};

/// Raw moments from central ones: raw2 = s^2 + m^2, raw3 = s^3 g + 3 s^2 m + m^3.
/// Throws ValidationError when std_dev is negative or any input is not finite.
MomentSet central_to_raw(double mean, double std_dev, double skewness);

/// Inverse of central_to_raw. Skewness is 0 for a degenerate variable.
/// Throws ValidationError when raw2 < mean^2 (beyond rounding).
MomentSet raw_to_central(double mean, double raw2, double raw3);

enum class Family { TwoPointDiscrete, Normal, Constant };

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

/// One atom of a discrete distribution.
struct Atom {
  double value;
  double weight;
};

/// Two-point distribution matching mean, variance and skewness of `target`
/// exactly (one atom when the target is degenerate). Used both for sampling
/// and as an exact quadrature rule for expectations of cubics.
std::vector<Atom> moment_matched_atoms(const MomentSet& target);

/// Immutable sampler whose first three moments match `target`.
class SampledDistribution {
 public:
  Family family() const { return family_; }
  const MomentSet& target() const { return target_; }

  /// TwoPointDiscrete: {p, v1, v2}; Normal: {mean, std_dev}; Constant: {value}.
  std::span<const double> parameters() const {
    return {parameters_.data(), size_};
  }

  double operator()(CounterRng& rng) const;

 private:
  friend SampledDistribution build_sampler(const MomentSet&, Family);

  SampledDistribution(Family family, const MomentSet& target,
                      std::array<double, 3> parameters, std::size_t size)
      : family_(family), target_(target), parameters_(parameters), size_(size) {}

  Family family_;
  MomentSet target_;
  std::array<double, 3> parameters_;
  std::size_t size_;
};

/// Throws ValidationError when Normal is requested for a skewed target or
/// Constant for a non-degenerate one.
SampledDistribution build_sampler(const MomentSet& target, Family family);

inline double sample(const SampledDistribution& dist, CounterRng& rng) {
  return dist(rng);
}

}  // namespace sadm
