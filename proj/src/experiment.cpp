#include "sadm/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

namespace sadm {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void reject_unknown_keys(const json& j, const std::string& where,
                         const std::set<std::string>& allowed) {
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double get_number(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(where + "." + key + ": must be finite");
  return d;
}

double get_number_or(const json& j, const std::string& key, const std::string& where,
                     double fallback) {
  return j.contains(key) ? get_number(j, key, where) : fallback;
}

std::int64_t get_integer(const json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}

// An omitted mean keeps the variable's default (a: 1, b: -2, c: 0).
MomentSet parse_moments(const json& j, const std::string& where, double default_mean) {
  require_object(j, where);
  reject_unknown_keys(j, where, {"mean", "std_dev", "skewness", "raw2", "raw3"});
  const bool central = j.contains("std_dev") || j.contains("skewness");
  const bool raw = j.contains("raw2") || j.contains("raw3");
  if (central && raw) {
    throw ConfigError(where + ": give either std_dev/skewness or raw2/raw3, not both");
  }
  const double mean = get_number_or(j, "mean", where, default_mean);
  try {
    if (raw) {
      if (!j.contains("raw2") || !j.contains("raw3")) {
        throw ConfigError(where + ": raw form needs both raw2 and raw3");
      }
      return raw_to_central(mean, get_number(j, "raw2", where), get_number(j, "raw3", where));
    }
    return central_to_raw(mean, get_number_or(j, "std_dev", where, 0.0),
                          get_number_or(j, "skewness", where, 0.0));
  } catch (const ValidationError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

StageNoise parse_stage(const json& j, const std::string& where) {
  require_object(j, where);
  reject_unknown_keys(j, where, {"a", "b", "c"});
  StageNoise noise = StageNoise::deterministic();
  if (j.contains("a")) noise.a = parse_moments(j.at("a"), where + ".a", noise.a.mean);
  if (j.contains("b")) noise.b = parse_moments(j.at("b"), where + ".b", noise.b.mean);
  if (j.contains("c")) noise.c = parse_moments(j.at("c"), where + ".c", 0.0);
  if (noise.c.mean != 0.0) throw ConfigError(where + ".c: additive noise must have zero mean");
  return noise;
}

CascadeConfig parse_cascade(const json& j) {
  const std::string where = "cascade";
  require_object(j, where);
  reject_unknown_keys(j, where, {"n_turbines", "x0", "rho", "area", "noise", "stages"});
  if (!j.contains("n_turbines")) throw ConfigError("cascade.n_turbines is required");
  const auto n = get_integer(j, "n_turbines", where);
  if (n < 1 || n > 100000) throw ConfigError("cascade.n_turbines must be in [1, 100000]");

  CascadeConfig config;
  config.n_turbines = static_cast<int>(n);
  config.x0 = get_number_or(j, "x0", where, 1.0);
  config.rho = get_number_or(j, "rho", where, 1.225);
  config.area = get_number_or(j, "area", where, 1.0);
  if (j.contains("noise") && j.contains("stages")) {
    throw ConfigError("cascade: give either 'noise' (homogeneous) or 'stages', not both");
  }
  if (j.contains("stages")) {
    const auto& stages = j.at("stages");
    if (!stages.is_array()) throw ConfigError("cascade.stages: expected an array");
    for (std::size_t k = 0; k < stages.size(); ++k) {
      config.stages.push_back(parse_stage(stages[k], "cascade.stages[" + std::to_string(k) + "]"));
    }
  } else {
    const auto noise = j.contains("noise") ? parse_stage(j.at("noise"), "cascade.noise")
                                           : StageNoise::deterministic();
    config.stages.assign(static_cast<std::size_t>(n), noise);
  }
  try {
    config.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("cascade: ") + e.what());
  }
  return config;
}

SweepSpec parse_sweep(const json& j) {
  require_object(j, "sweep");
  reject_unknown_keys(j, "sweep", {"parameter", "values"});
  SweepSpec spec;
  if (!j.contains("parameter") || !j.at("parameter").is_string()) {
    throw ConfigError("sweep.parameter: expected one of sigma_a, sigma_b, gamma_a, gamma_b, "
                      "mu_a, mu_b");
  }
  try {
    spec.parameter = sweep_parameter_from_string(j.at("parameter").get<std::string>());
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("sweep.parameter: ") + e.what());
  }
  if (j.contains("values")) {
    const auto& values = j.at("values");
    if (!values.is_array() || values.empty()) {
      throw ConfigError("sweep.values: expected a non-empty array");
    }
    spec.values.clear();
    for (const auto& v : values) {
      if (!v.is_number() || !std::isfinite(v.get<double>())) {
        throw ConfigError("sweep.values: entries must be finite numbers");
      }
      spec.values.push_back(v.get<double>());
    }
  }
  return spec;
}

SimulationSpec parse_simulation(const json& j) {
  require_object(j, "simulation");
  reject_unknown_keys(j, "simulation", {"n_samples", "seed", "family"});
  SimulationSpec spec;
  if (j.contains("n_samples")) {
    spec.n_samples = get_integer(j, "n_samples", "simulation");
    if (spec.n_samples < 1) throw ConfigError("simulation.n_samples must be at least 1");
  }
  if (j.contains("seed")) {
    const auto seed = get_integer(j, "seed", "simulation");
    if (seed < 0) throw ConfigError("simulation.seed must be non-negative");
    spec.seed = static_cast<std::uint64_t>(seed);
  }
  if (j.contains("family")) {
    if (!j.at("family").is_string()) throw ConfigError("simulation.family: expected a string");
    try {
      spec.family = family_from_string(j.at("family").get<std::string>());
    } catch (const ValidationError& e) {
      throw ConfigError(std::string("simulation.family: ") + e.what());
    }
  }
  return spec;
}

GridSpec parse_grid(const json& j) {
  require_object(j, "grid");
  reject_unknown_keys(j, "grid", {"x_max", "n_x", "n_u"});
  GridSpec spec;
  if (j.contains("x_max")) {
    spec.x_max = get_number(j, "x_max", "grid");
    if (!(*spec.x_max > 0.0)) throw ConfigError("grid.x_max must be positive");
  }
  if (j.contains("n_x")) spec.n_x = static_cast<int>(get_integer(j, "n_x", "grid"));
  if (j.contains("n_u")) spec.n_u = static_cast<int>(get_integer(j, "n_u", "grid"));
  if (spec.n_x < 2 || spec.n_u < 2) throw ConfigError("grid.n_x and grid.n_u must be >= 2");
  return spec;
}

OutputSpec parse_output(const json& j) {
  require_object(j, "output");
  reject_unknown_keys(j, "output", {"format", "path"});
  OutputSpec spec;
  if (j.contains("format")) {
    const auto& f = j.at("format");
    if (f == "csv") {
      spec.format = OutputFormat::Csv;
    } else if (f == "json") {
      spec.format = OutputFormat::Json;
    } else {
      throw ConfigError("output.format: expected 'csv' or 'json'");
    }
  }
  if (j.contains("path")) {
    if (!j.at("path").is_string()) throw ConfigError("output.path: expected a string");
    spec.path = j.at("path").get<std::string>();
  }
  return spec;
}

}  // namespace

std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::SigmaA: return "sigma_a";
    case SweepParameter::SigmaB: return "sigma_b";
    case SweepParameter::GammaA: return "gamma_a";
    case SweepParameter::GammaB: return "gamma_b";
    case SweepParameter::MuA: return "mu_a";
    case SweepParameter::MuB: return "mu_b";
  }
  return "unknown";
}

SweepParameter sweep_parameter_from_string(std::string_view name) {
  for (auto p : {SweepParameter::SigmaA, SweepParameter::SigmaB, SweepParameter::GammaA,
                 SweepParameter::GammaB, SweepParameter::MuA, SweepParameter::MuB}) {
    if (to_string(p) == name) return p;
  }
  throw ValidationError("unknown sweep parameter '" + std::string(name) + "'");
}

ExperimentConfig parse_experiment(const json& doc) {
  require_object(doc, "config");
  reject_unknown_keys(doc, "config", {"cascade", "sweep", "simulation", "grid", "output"});
  if (!doc.contains("cascade")) throw ConfigError("config: 'cascade' block is required");
  ExperimentConfig config;
  config.cascade = parse_cascade(doc.at("cascade"));
  if (doc.contains("sweep")) config.sweep = parse_sweep(doc.at("sweep"));
  if (doc.contains("simulation")) config.simulation = parse_simulation(doc.at("simulation"));
  if (doc.contains("grid")) config.grid = parse_grid(doc.at("grid"));
  if (doc.contains("output")) config.output = parse_output(doc.at("output"));
  return config;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_experiment(doc);
}

CascadeConfig with_swept_value(const CascadeConfig& cascade, SweepParameter parameter,
                               double value) {
  CascadeConfig out = cascade;
  for (auto& stage : out.stages) {
    MomentSet& target = (parameter == SweepParameter::SigmaA || parameter == SweepParameter::GammaA ||
                         parameter == SweepParameter::MuA)
                            ? stage.a
                            : stage.b;
    double mean = target.mean;
    double std_dev = target.std_dev;
    double skewness = target.skewness;
    switch (parameter) {
      case SweepParameter::SigmaA:
      case SweepParameter::SigmaB: std_dev = value; break;
      case SweepParameter::GammaA:
      case SweepParameter::GammaB: skewness = value; break;
      case SweepParameter::MuA:
      case SweepParameter::MuB: mean = value; break;
    }
    target = central_to_raw(mean, std_dev, skewness);
  }
  return out;
}

CascadeConfig mean_field(const CascadeConfig& cascade) {
  CascadeConfig out = cascade;
  for (auto& stage : out.stages) {
    stage = StageNoise::deterministic(stage.a.mean, stage.b.mean);
  }
  return out;
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) {
    throw std::logic_error("row width does not match table columns");
  }
  rows_.push_back(std::move(row));
}

std::string format_number(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

std::string Table::to_csv() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    out << (i ? "," : "") << columns_[i];
  }
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              out << format_number(v);
            } else {
              out << v;
            }
          },
          row[i]);
    }
    out << '\n';
  }
  return out.str();
}

json Table::to_json() const {
  json rows = json::array();
  for (const auto& row : rows_) {
    json obj = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit([&](const auto& v) { obj[columns_[i]] = v; }, row[i]);
    }
    rows.push_back(std::move(obj));
  }
  return rows;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  const auto parent = path.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace sadm
