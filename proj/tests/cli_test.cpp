#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "parity_market/cli.hpp"

namespace parity_market {
namespace {

namespace fs = std::filesystem;

struct Captured {
  int code;
  std::string out;
  std::string err;
};

Captured invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("parity_market_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const auto path = dir / "tiny.cfg";
  std::ofstream(path) << text;
  return path;
}

const char* kTiny =
    "# small market\n"
    "n_employers = 5\nnew_per_step = 125\nburn_in_steps = 10\nmeasure_steps = 10\ntrials = 2\n";

TEST(CliTest, RunJson) {
  const auto dir = scratch_dir("run_json");
  const auto cfg = write_config(dir, kTiny);
  const auto r = invoke({"run", "--config", cfg.string(), "--format", "json", "--set", "n_compliant=2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["trials"].size(), 2u);
  EXPECT_EQ(j["config"]["n_compliant"], 2);
  EXPECT_EQ(j["trials"][0]["measured_rounds"], 10);
  EXPECT_TRUE(j["trials"][0].contains("di"));
  EXPECT_EQ(j["fingerprint"].get<std::string>().size(), 16u);
}

TEST(CliTest, MissingConfigFileIsUsageError) {
  const auto r = invoke({"run", "--config", "/nonexistent/market.cfg"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/nonexistent/market.cfg"), std::string::npos);
}

TEST(CliTest, InvalidValuesAreAllReported) {
  const auto r = invoke({"run", "--set", "fraction_b=2", "--set", "spots=-1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("fraction_b"), std::string::npos);
  EXPECT_NE(r.err.find("spots"), std::string::npos);
}

TEST(CliTest, SeedPrecedence) {
  const auto dir = scratch_dir("seed");
  const auto cfg = write_config(dir, std::string(kTiny) + "trials = 1\n");
  auto seed_of = [&](std::vector<std::string> extra) {
    std::vector<std::string> args = {"run", "--config", cfg.string(), "--format", "json"};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = invoke(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return nlohmann::json::parse(r.out)["config"]["seed"].get<std::uint64_t>();
  };
  ::setenv(cli::kSeedEnv, "99", 1);
  EXPECT_EQ(seed_of({}), 99u);
  EXPECT_EQ(seed_of({"--set", "seed=5"}), 5u);
  EXPECT_EQ(seed_of({"--set", "seed=5", "--seed", "6"}), 6u);
  ::unsetenv(cli::kSeedEnv);
  EXPECT_EQ(seed_of({}), MarketConfig{}.seed);
}

TEST(CliTest, SweepWritesCsvAndResumes) {
  const auto dir = scratch_dir("sweep");
  const auto cfg = write_config(dir, kTiny);
  const std::vector<std::string> args = {"sweep", "--config", cfg.string(), "--levels", "0,2,5",
                                         "--out", dir.string(), "--format", "json"};
  const auto first = invoke(args);
  ASSERT_EQ(first.code, 0) << first.err;
  const auto csv = dir / "tiny_sweep.csv";
  ASSERT_TRUE(fs::exists(csv));
  ASSERT_TRUE(fs::exists(dir / "tiny_sweep.csv.meta.json") || fs::exists(meta_path_for(csv)));
  const auto rows = read_results(csv);
  EXPECT_EQ(rows.size(), 6u);
  EXPECT_EQ(nlohmann::json::parse(first.out)["reused_rows"], 0);

  const auto second = invoke(args);
  ASSERT_EQ(second.code, 0) << second.err;
  EXPECT_EQ(nlohmann::json::parse(second.out)["reused_rows"], 6);
  EXPECT_EQ(read_results(csv), rows);
}

TEST(CliTest, ReportRendersCharts) {
  const auto dir = scratch_dir("report");
  const auto cfg = write_config(dir, kTiny);
  ASSERT_EQ(invoke({"sweep", "--config", cfg.string(), "--levels", "0,5", "--out", dir.string()}).code, 0);
  const auto charts = dir / "charts";
  const auto r = invoke({"report", (dir / "tiny_sweep.csv").string(), "--out", charts.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_TRUE(fs::exists(charts / "benefit.svg"));
  std::ifstream in(charts / "benefit.svg");
  const std::string svg((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_NE(svg.find("<svg"), std::string::npos);
}

TEST(CliTest, ReportRejectsMissingColumn) {
  const auto dir = scratch_dir("bad_csv");
  const auto bad = dir / "bad.csv";
  std::ofstream(bad) << "n_compliant,trial\n0,0\n";
  const auto r = invoke({"report", bad.string(), "--out", dir.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("missing column: di"), std::string::npos);
}

TEST(CliTest, PresetsListed) {
  const auto r = invoke({"presets"});
  ASSERT_EQ(r.code, 0);
  for (const auto& p : scenario_presets()) EXPECT_NE(r.out.find(p.name), std::string::npos);
}

TEST(CliTest, PresetNameAsConfig) {
  const auto r = invoke({"run", "--config", "local-adaptive-50", "--set", "n_employers=5", "--set",
                         "new_per_step=125", "--set", "burn_in_steps=5", "--set", "measure_steps=5",
                         "--trials", "1", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["scenario"], "local-adaptive-50");
  EXPECT_EQ(j["config"]["fraction_b"], 0.5);
}

TEST(CliTest, HelpListsFlags) {
  const auto r = invoke({"sweep", "--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* flag : {"--config", "--set", "--seed", "--trials", "--jobs", "--levels", "--out", "--scale"})
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
}

TEST(CliTest, UnknownCommandIsUsageError) { EXPECT_EQ(invoke({"frobnicate"}).code, 2); }

TEST(CliBinaryTest, ExitCodes) {
  const char* exe = std::getenv("PARITY_MARKET_CLI");
  if (!exe) GTEST_SKIP() << "PARITY_MARKET_CLI not set";
  EXPECT_EQ(std::system((std::string(exe) + " presets > /dev/null").c_str()), 0);
  const int status = std::system((std::string(exe) + " run --config /nonexistent.cfg 2> /dev/null").c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 2);
}

}  // namespace
}  // namespace parity_market
