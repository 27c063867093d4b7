#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sadm/dp.hpp"
#include "sadm/moments.hpp"

namespace sadm {

/// Malformed or schema-invalid experiment file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SweepParameter { SigmaA, SigmaB, GammaA, GammaB, MuA, MuB };

std::string_view to_string(SweepParameter p);
SweepParameter sweep_parameter_from_string(std::string_view name);

struct SweepSpec {
  SweepParameter parameter = SweepParameter::SigmaB;
  std::vector<double> values{0.0, 0.1, 0.2, 0.3, 0.4};
};

struct SimulationSpec {
  std::int64_t n_samples = 100000;
  std::uint64_t seed = 0;
  Family family = Family::TwoPointDiscrete;
};

struct GridSpec {
  std::optional<double> x_max;  // defaults to 1.5 x0
  int n_x = 200;
  int n_u = 2000;
};

enum class OutputFormat { Csv, Json };

struct OutputSpec {
  std::optional<OutputFormat> format;
  std::optional<std::string> path;
};

struct ExperimentConfig {
  CascadeConfig cascade;
  std::optional<SweepSpec> sweep;
  std::optional<SimulationSpec> simulation;
  GridSpec grid;
  OutputSpec output;
};

/// Throws ConfigError with a message naming the offending key.
ExperimentConfig parse_experiment(const nlohmann::json& doc);
ExperimentConfig load_experiment(const std::filesystem::path& path);

/// Copy of `cascade` with one central moment replaced on every stage.
CascadeConfig with_swept_value(const CascadeConfig& cascade, SweepParameter parameter,
                               double value);

/// Same means, all randomness removed.
CascadeConfig mean_field(const CascadeConfig& cascade);

/// Column-ordered table written as CSV or as a JSON array of row objects.
class Table {
 public:
  using Cell = std::variant<double, std::int64_t, std::string>;

  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(std::vector<Cell> row);
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }

  std::string to_csv() const;
  nlohmann::json to_json() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

/// Shortest decimal string that parses back to the same double.
std::string format_number(double value);

/// Writes via a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace sadm
