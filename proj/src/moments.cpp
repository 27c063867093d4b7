#include "sadm/moments.hpp"

#include <cmath>
#include <random>
#include <string>

namespace sadm {

namespace {

struct TwoPointShape {
  double p;   // weight of the upper point
  double s1;  // standardized upper point
  double s2;  // standardized lower point
};

TwoPointShape two_point_shape(double skewness) {
  const double p = 0.5 * (1.0 - skewness / std::sqrt(4.0 + skewness * skewness));
  return {p, std::sqrt((1.0 - p) / p), -std::sqrt(p / (1.0 - p))};
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw ValidationError(std::string(what) + " must be finite");
  }
}

}  // namespace

MomentSet MomentSet::constant(double value) {
  return central_to_raw(value, 0.0, 0.0);
}

MomentSet central_to_raw(double mean, double std_dev, double skewness) {
  require_finite(mean, "mean");
  require_finite(std_dev, "std_dev");
  require_finite(skewness, "skewness");
  if (std_dev < 0.0) {
    throw ValidationError("std_dev must be non-negative, got " + std::to_string(std_dev));
  }
  MomentSet m;
  m.mean = mean;
  m.std_dev = std_dev;
  m.skewness = std_dev == 0.0 ? 0.0 : skewness;
  const double var = std_dev * std_dev;
  m.raw2 = var + mean * mean;
  m.raw3 = var * std_dev * m.skewness + 3.0 * var * mean + mean * mean * mean;
  return m;
}

MomentSet raw_to_central(double mean, double raw2, double raw3) {
  require_finite(mean, "mean");
  require_finite(raw2, "raw2");
  require_finite(raw3, "raw3");
  const double mean_sq = mean * mean;
  double var = raw2 - mean_sq;
  if (var < 0.0) {
    // Rounding in raw2 = s^2 + m^2 can leave a tiny negative residue.
    if (var < -1e-12 * std::max(1.0, raw2)) {
      throw ValidationError("raw2 must be at least mean^2");
    }
    var = 0.0;
  }
  MomentSet m;
  m.mean = mean;
  m.std_dev = std::sqrt(var);
  m.raw2 = raw2;
  m.raw3 = raw3;
  if (m.std_dev > 0.0) {
    m.skewness = (raw3 - 3.0 * var * mean - mean_sq * mean) / (var * m.std_dev);
  }
  return m;
}

std::string_view to_string(Family family) {
  switch (family) {
    case Family::TwoPointDiscrete: return "two_point";
    case Family::Normal: return "normal";
    case Family::Constant: return "constant";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  if (name == "two_point") return Family::TwoPointDiscrete;
  if (name == "normal") return Family::Normal;
  if (name == "constant") return Family::Constant;
  throw ValidationError("unknown distribution family '" + std::string(name) + "'");
}

std::vector<Atom> moment_matched_atoms(const MomentSet& target) {
  if (target.degenerate()) {
    return {{target.mean, 1.0}};
  }
  const auto shape = two_point_shape(target.skewness);
  return {{target.mean + target.std_dev * shape.s1, shape.p},
          {target.mean + target.std_dev * shape.s2, 1.0 - shape.p}};
}

SampledDistribution build_sampler(const MomentSet& target, Family family) {
  switch (family) {
    case Family::Constant:
      if (!target.degenerate()) {
        throw ValidationError("Constant family requires std_dev = 0");
      }
      return {family, target, {target.mean, 0.0, 0.0}, 1};
    case Family::Normal:
      if (target.skewness != 0.0) {
        throw ValidationError("Normal family requires skewness = 0");
      }
      return {family, target, {target.mean, target.std_dev, 0.0}, 2};
    case Family::TwoPointDiscrete: {
      const auto shape = two_point_shape(target.skewness);
      return {family, target,
              {shape.p, target.mean + target.std_dev * shape.s1,
               target.mean + target.std_dev * shape.s2},
              3};
    }
  }
  throw ValidationError("unknown distribution family");
}

double SampledDistribution::operator()(CounterRng& rng) const {
  switch (family_) {
    case Family::Constant:
      return parameters_[0];
    case Family::Normal: {
      if (parameters_[1] == 0.0) return parameters_[0];
      std::normal_distribution<double> normal(parameters_[0], parameters_[1]);
      return normal(rng);
    }
    case Family::TwoPointDiscrete:
      return rng.uniform() < parameters_[0] ? parameters_[1] : parameters_[2];
  }
  return 0.0;
}

}  // namespace sadm
