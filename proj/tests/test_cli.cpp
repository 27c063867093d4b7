// Drives the sadm executable end to end.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#ifndef SADM_CLI_PATH
#error "SADM_CLI_PATH must point at the sadm executable"
#endif

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sadm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const std::string& body) {
    const auto path = dir_ / name;
    std::ofstream(path) << body;
    return path;
  }

  int run(const std::string& args, const std::string& env = "") {
    const std::string cmd =
        env + " " + std::string(SADM_CLI_PATH) + " " + args + " 2>" + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string read(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

const char* kDeterministicOne = R"({"cascade": {"n_turbines": 1}})";

const char* kNoisyWake = R"({
  "cascade": {"n_turbines": 10,
              "noise": {"a": {"mean": 1.0}, "b": {"mean": -2.0, "std_dev": 0.4}}},
  "sweep": {"parameter": "sigma_b", "values": [0, 0.1, 0.2, 0.3, 0.4]},
  "simulation": {"n_samples": 20000, "seed": 3}
})";

TEST_F(Cli, SolveSingleTurbineRow) {
  const auto cfg = write_config("c.json", kDeterministicOne);
  const auto out = dir_ / "solve.csv";
  ASSERT_EQ(run("solve --config " + cfg.string() + " --output " + out.string()), 0);
  std::stringstream lines(read(out));
  std::string header, row, extra;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_FALSE(std::getline(lines, extra));
  EXPECT_EQ(header, "k,psi,psi_normalized,Q,eta,status");
  std::vector<std::string> cells;
  std::stringstream cs(row);
  for (std::string cell; std::getline(cs, cell, ',');) cells.push_back(cell);
  ASSERT_EQ(cells.size(), 6u);
  EXPECT_EQ(cells[0], "0");
  EXPECT_NEAR(std::stod(cells[1]), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(std::stod(cells[2]), 1.0, 1e-15);
  EXPECT_NEAR(std::stod(cells[3]), 4.0 / 27.0, 1e-15);
  EXPECT_NEAR(std::stod(cells[4]), 16.0 / 27.0, 1e-15);
  EXPECT_EQ(cells[5], "Interior");
}

TEST_F(Cli, SolveNoisyWakeRowsAndNormalizedGainsIncreaseDownstream) {
  const auto cfg = write_config("c.json", kNoisyWake);
  const auto out = dir_ / "solve.json";
  ASSERT_EQ(run("solve --config " + cfg.string() + " --output " + out.string()), 0);
  const auto doc = nlohmann::json::parse(read(out));
  const auto& rows = doc["turbines"];
  ASSERT_EQ(rows.size(), 10u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_GE(rows[k]["psi_normalized"].get<double>(), rows[k - 1]["psi_normalized"].get<double>());
  }
  EXPECT_DOUBLE_EQ(doc["Q_terminal"].get<double>(), 0.0);
}

TEST_F(Cli, MalformedConfigExitsOneWithoutOutput) {
  const auto cfg = write_config("bad.json", R"({"cascade": {"n_turbines": "ten"}})");
  const auto out = dir_ / "never.csv";
  EXPECT_EQ(run("solve --config " + cfg.string() + " --output " + out.string()), 1);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(run("solve --config " + (dir_ / "missing.json").string() + " --output " + out.string()), 1);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(run("solve"), 1);  // --config is required
}

TEST_F(Cli, SweepLongFormatAndEfficiencyGrowsWithInputNoise) {
  const auto cfg = write_config("c.json", kNoisyWake);
  const auto out = dir_ / "sweep.csv";
  ASSERT_EQ(run("sweep --config " + cfg.string() + " --output " + out.string()), 0);
  std::stringstream lines(read(out));
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "sweep_value,turbine_index,psi,psi_normalized,Q,eta");
  std::vector<double> eta0;
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    if (line.find(",0,") != std::string::npos && line.rfind(",") != std::string::npos) {
      const auto cells = line.substr(0, line.find(','));
      if (line.substr(cells.size() + 1, 2) == "0,") eta0.push_back(std::stod(line.substr(line.rfind(',') + 1)));
    }
  }
  EXPECT_EQ(rows, 50);
  ASSERT_EQ(eta0.size(), 5u);
  for (std::size_t i = 1; i < eta0.size(); ++i) EXPECT_GE(eta0[i], eta0[i - 1]);
}

TEST_F(Cli, SweepSingleValueMatchesSolve) {
  const auto cfg = write_config("c.json", R"({
    "cascade": {"n_turbines": 4, "noise": {"b": {"mean": -2, "std_dev": 0.25}}},
    "sweep": {"parameter": "sigma_b", "values": [0]}})");
  const auto det = write_config("d.json", R"({"cascade": {"n_turbines": 4}})");
  ASSERT_EQ(run("sweep --config " + cfg.string() + " --output " + (dir_ / "s.json").string()), 0);
  ASSERT_EQ(run("solve --config " + det.string() + " --output " + (dir_ / "d.json").string()), 0);
  const auto sweep = nlohmann::json::parse(read(dir_ / "s.json"))["rows"];
  const auto solve = nlohmann::json::parse(read(dir_ / "d.json"))["turbines"];
  ASSERT_EQ(sweep.size(), solve.size());
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    EXPECT_EQ(sweep[k]["psi"], solve[k]["psi"]);
    EXPECT_EQ(sweep[k]["Q"], solve[k]["Q"]);
  }
}

TEST_F(Cli, SweepRequiresBlock) {
  const auto cfg = write_config("c.json", kDeterministicOne);
  EXPECT_EQ(run("sweep --config " + cfg.string()), 1);
}

TEST_F(Cli, VerifyPassesAndHookFails) {
  const auto det = write_config("d.json", R"({"cascade": {"n_turbines": 3}})");
  const auto noisy_wake = write_config("c.json", kNoisyWake);
  EXPECT_EQ(run("verify --config " + det.string() + " --output " + (dir_ / "v1.json").string()), 0);
  EXPECT_TRUE(nlohmann::json::parse(read(dir_ / "v1.json"))["pass"].get<bool>());
  EXPECT_EQ(run("verify --config " + noisy_wake.string() + " --output " + (dir_ / "v2.csv").string()), 0);
  EXPECT_EQ(run("verify --config " + det.string() + " --inject-gain-offset 0.05 --output " +
                (dir_ / "v3.json").string()),
            3);
  EXPECT_FALSE(nlohmann::json::parse(read(dir_ / "v3.json"))["pass"].get<bool>());
}

TEST_F(Cli, SolveOutputRoundTripsThroughVerify) {
  const auto cfg = write_config("c.json", kNoisyWake);
  for (const char* ext : {"csv", "json"}) {
    const auto sol = dir_ / (std::string("sol.") + ext);
    ASSERT_EQ(run("solve --config " + cfg.string() + " --output " + sol.string()), 0);
    EXPECT_EQ(run("verify --config " + cfg.string() + " --solution " + sol.string() +
                  " --output " + (dir_ / "v.json").string()),
              0)
        << ext;
  }
  // a tampered solution file is caught
  auto text = read(dir_ / "sol.csv");
  const auto pos = text.find("\n0,") + 3;
  text.replace(pos, text.find(',', pos) - pos, "0.3");
  std::ofstream(dir_ / "bad.csv") << text;
  EXPECT_EQ(run("verify --config " + cfg.string() + " --solution " + (dir_ / "bad.csv").string() +
                " --output " + (dir_ / "v.json").string()),
            3);
}

TEST_F(Cli, SimulateDeterministicSingleSampleIsExact) {
  const auto cfg = write_config("c.json", R"({
    "cascade": {"n_turbines": 3, "rho": 1.0, "area": 1.0}, "simulation": {}})");
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --samples 1 --output " +
                (dir_ / "s.json").string()),
            0);
  const auto doc = nlohmann::json::parse(read(dir_ / "s.json"));
  EXPECT_NEAR(doc["policies"][0]["mean_total_power"].get<double>(), 2.0 * 8.0 / 49.0, 1e-14);
  EXPECT_NEAR(doc["analytic_max_power"].get<double>(), 2.0 * 8.0 / 49.0, 1e-14);
}

TEST_F(Cli, SimulateComparisonOptimalBeatsBetz) {
  const auto cfg = write_config("c.json", kNoisyWake);
  const auto out = dir_ / "cmp.json";
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --policy betz --policy optimal --output " +
                out.string()),
            0);
  const auto rows = nlohmann::json::parse(read(out))["policies"];
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0]["policy"], "optimal");
  EXPECT_GE(rows[0]["mean_total_power"].get<double>(), rows[1]["ci95_low"].get<double>());
}

TEST_F(Cli, SimulateIsDeterministic) {
  const auto cfg = write_config("c.json", kNoisyWake);
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --seed 5 --samples 3000 --output " +
                (dir_ / "a.csv").string()),
            0);
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --seed 5 --samples 3000 --output " +
                (dir_ / "b.csv").string()),
            0);
  EXPECT_EQ(read(dir_ / "a.csv"), read(dir_ / "b.csv"));
  EXPECT_EQ(read(dir_ / "a.csv").rfind(
                "policy,mean_total_power,std_error,ci95_low,ci95_high,n_samples,seed,"
                "negative_state_fraction,eta_0,",
                0),
            0u);
}

TEST_F(Cli, SimulateFamilyIncompatibilityExitsFour) {
  const auto cfg = write_config("c.json", R"({
    "cascade": {"n_turbines": 2, "noise": {"b": {"mean": -2, "std_dev": 0.2, "skewness": 1}}},
    "simulation": {"family": "normal"}})");
  EXPECT_EQ(run("simulate --config " + cfg.string() + " --samples 10"), 4);
}

TEST_F(Cli, SimulateRequiresSimulationBlockAndKnownPolicy) {
  const auto plain = write_config("p.json", kDeterministicOne);
  EXPECT_EQ(run("simulate --config " + plain.string()), 1);
  const auto cfg = write_config("c.json", kNoisyWake);
  EXPECT_EQ(run("simulate --config " + cfg.string() + " --policy myopic"), 1);
}

TEST_F(Cli, AdditiveConfigRoutesToGridPolicy) {
  const auto cfg = write_config("c.json", R"({
    "cascade": {"n_turbines": 3, "noise": {"c": {"std_dev": 0.1}}},
    "grid": {"n_x": 41, "n_u": 201},
    "simulation": {"n_samples": 2000}})");
  EXPECT_EQ(run("solve --config " + cfg.string()), 1);
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --policy optimal --policy betz --output " +
                (dir_ / "s.json").string()),
            0);
  const auto doc = nlohmann::json::parse(read(dir_ / "s.json"));
  EXPECT_FALSE(doc.contains("analytic_max_power"));
  EXPECT_EQ(doc["policies"].size(), 2u);
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
  const auto cfg = write_config("c.json", kDeterministicOne);
  const auto outdir = dir_ / "results";
  ASSERT_EQ(run("solve --config " + cfg.string() + " --format json",
                "SADM_OUTPUT_DIR=" + outdir.string()),
            0);
  ASSERT_TRUE(fs::exists(outdir / "solve.json"));
  EXPECT_EQ(nlohmann::json::parse(read(outdir / "solve.json"))["n_turbines"], 1);
}

}  // namespace
