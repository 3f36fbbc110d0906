#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "parity_market/experiment.hpp"
#include "test_support.hpp"

namespace parity_market {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("parity_market_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

SweepSpec small_sweep(std::vector<int> levels, int trials = 2) {
  SweepSpec spec;
  spec.name = "small";
  spec.base = testing::small_config(StrategyKind::StaticPreference);
  spec.levels = std::move(levels);
  spec.trials = trials;
  return spec;
}

TEST(SweepSpecTest, FullCoversEveryLevel) {
  const auto spec = SweepSpec::full("x", MarketConfig::defaults());
  EXPECT_EQ(spec.levels.size(), 51u);
  EXPECT_EQ(spec.levels.front(), 0);
  EXPECT_EQ(spec.levels.back(), 50);
  EXPECT_EQ(spec.trials, 10);
  EXPECT_EQ(spec.config_at(7).n_compliant, 7);
}

TEST(SweepSpecTest, Validation) {
  EXPECT_TRUE(validate_sweep(small_sweep({0, 5})).empty());
  EXPECT_FALSE(validate_sweep(small_sweep({5, 0})).empty());
  EXPECT_FALSE(validate_sweep(small_sweep({0, 0})).empty());
  EXPECT_FALSE(validate_sweep(small_sweep({0, 11})).empty());
  EXPECT_FALSE(validate_sweep(small_sweep({3})).empty());
  EXPECT_THROW(run_sweep(small_sweep({3})), ConfigError);
}

TEST(RunSweepTest, RowCountAndOrder) {
  const auto rows = run_sweep(small_sweep({0, 3, 10}, 3));
  ASSERT_EQ(rows.size(), 9u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].n_compliant, (std::vector<int>{0, 3, 10})[i / 3]);
    EXPECT_EQ(rows[i].trial, static_cast<int>(i % 3));
    EXPECT_EQ(rows[i].seed, 7u);
  }
}

TEST(RunSweepTest, SingleBaselineRowHasZeroBenefit) {
  const auto rows = run_sweep(small_sweep({0}, 1));
  ASSERT_EQ(rows.size(), 1u);
  ASSERT_TRUE(rows[0].scaled_benefit.has_value());
  EXPECT_EQ(*rows[0].scaled_benefit, 0.0);
}

TEST(RunSweepTest, BenefitMatchesBaselineFormula) {
  const auto rows = run_sweep(small_sweep({0, 5}, 3));
  const double base = (*rows[0].di + *rows[1].di + *rows[2].di) / 3.0;
  for (std::size_t i = 3; i < rows.size(); ++i)
    EXPECT_NEAR(*rows[i].scaled_benefit, (*rows[i].di - base) / (1.0 - base), 1e-12);
}

TEST(RunSweepTest, DeterministicAndJobIndependent) {
  const auto spec = small_sweep({0, 4, 8}, 3);
  const auto a = run_sweep(spec, {.jobs = 1, .reuse = {}});
  const auto b = run_sweep(spec, {.jobs = 1, .reuse = {}});
  const auto c = run_sweep(spec, {.jobs = 4, .reuse = {}});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  EXPECT_EQ(to_csv(a), to_csv(c));
}

TEST(RunSweepTest, ReusedRowsAreKept) {
  const auto spec = small_sweep({0, 4}, 2);
  const auto full = run_sweep(spec);
  SweepOptions opt;
  opt.reuse = {full[0], full[3]};
  opt.reuse[1].pool_size_mean = -1.0;  // marker: must be taken verbatim
  const auto resumed = run_sweep(spec, opt);
  EXPECT_EQ(resumed[3].pool_size_mean, -1.0);
  EXPECT_EQ(resumed[1], full[1]);
  EXPECT_EQ(resumed[2], full[2]);
}

TEST(CsvTest, HeaderAndRoundTrip) {
  const auto rows = run_sweep(small_sweep({0, 2, 10}, 2));
  const std::string csv = to_csv(rows);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header,
            "n_compliant,trial,di,scaled_benefit,b_share_hires_compliant,b_share_hires_noncompliant,"
            "p_compliant_a,p_compliant_b,rate_a_compliant,rate_a_noncompliant,rate_b_compliant,"
            "rate_b_noncompliant,pool_size_mean,seed");
  EXPECT_EQ(parse_csv(csv), rows);
  EXPECT_EQ(to_csv(parse_csv(csv)), csv);
}

TEST(CsvTest, MissingValuesAreEmptyFields) {
  SweepRow r;
  r.n_compliant = 0;
  r.p_compliant = {0.25, 0.5};
  const std::string csv = to_csv({r});
  EXPECT_NE(csv.find("\n0,0,,,,,0.25,0.5,,,,,0,0"), std::string::npos) << csv;
  EXPECT_EQ(parse_csv(csv)[0], r);
}

TEST(CsvTest, MissingColumnIsSchemaError) {
  try {
    parse_csv("n_compliant,trial\n0,0\n");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("missing column: di"), std::string::npos);
  }
}

TEST(CsvTest, FullSweepLineCount) {
  std::vector<SweepRow> rows;
  for (int k = 0; k <= 50; ++k)
    for (int t = 0; t < 10; ++t) {
      SweepRow r;
      r.n_compliant = k;
      r.trial = t;
      rows.push_back(r);
    }
  const std::string csv = to_csv(rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 511);
}

TEST(ResultsFileTest, WriteReadAndResume) {
  const auto dir = scratch_dir("experiment_resume");
  const auto spec = small_sweep({0, 5}, 2);
  const auto rows = run_sweep(spec);
  const auto path = csv_path_for(dir, spec.name);
  EXPECT_EQ(path.filename(), "small_sweep.csv");
  write_results(rows, spec, path, 1.5);
  EXPECT_TRUE(fs::exists(meta_path_for(path)));
  EXPECT_EQ(read_results(path), rows);
  EXPECT_EQ(load_resumable(spec, path), rows);

  const auto meta = nlohmann::json::parse(read_text_file(meta_path_for(path)));
  EXPECT_EQ(meta["fingerprint"], sweep_fingerprint(spec));
  EXPECT_EQ(meta["version"], std::string(kVersion));

  // More trials share streams with the earlier ones; a changed seed does not.
  auto wider = spec;
  wider.trials = 3;
  EXPECT_EQ(load_resumable(wider, path).size(), rows.size());
  auto reseeded = spec;
  reseeded.base.seed = 8;
  EXPECT_TRUE(load_resumable(reseeded, path).empty());
  fs::remove_all(dir);
}

TEST(AggregateTest, MeanAndSampleDeviation) {
  SweepRow a, b;
  a.n_compliant = b.n_compliant = 3;
  b.trial = 1;
  a.di = 0.4;
  b.di = 0.6;
  const auto aggs = aggregate({a, b});
  ASSERT_EQ(aggs.size(), 1u);
  const auto& cell = aggs[0].cells[numeric_index("di")];
  EXPECT_DOUBLE_EQ(*cell.mean, 0.5);
  EXPECT_NEAR(*cell.stddev, 0.1414, 5e-5);
  EXPECT_EQ(cell.count, 2);
  const auto& missing = aggs[0].cells[numeric_index("scaled_benefit")];
  EXPECT_EQ(missing.count, 0);
  EXPECT_FALSE(missing.mean.has_value());
}

}  // namespace
}  // namespace parity_market
