#include <vector>

#include <gtest/gtest.h>

#include "parity_market/metrics.hpp"
#include "test_support.hpp"

namespace parity_market {
namespace {

WindowCounts counts(std::int64_t hires_a, std::int64_t entrants_a, std::int64_t hires_b, std::int64_t entrants_b) {
  WindowCounts c;
  c.acceptance.hired(Group::A, Sector::NonCompliant) = hires_a;
  c.acceptance.hired(Group::B, Sector::NonCompliant) = hires_b;
  c.entrants = {entrants_a, entrants_b};
  return c;
}

TEST(DisparateImpactTest, CohortRatio) {
  const auto di = disparate_impact(counts(400, 937, 100, 313));
  ASSERT_TRUE(di.has_value());
  EXPECT_NEAR(*di, (100.0 / 313.0) / (400.0 / 937.0), 1e-15);
  EXPECT_NEAR(*di, 0.7484, 5e-5);
}

TEST(DisparateImpactTest, MissingCases) {
  EXPECT_FALSE(disparate_impact(counts(0, 100, 10, 100)).has_value());
  EXPECT_FALSE(disparate_impact(counts(10, 0, 10, 100)).has_value());
  EXPECT_FALSE(disparate_impact(counts(10, 100, 0, 0)).has_value());
  EXPECT_EQ(disparate_impact(counts(10, 100, 0, 100)), 0.0);
}

TEST(DisparateImpactTest, ScaleInvariant) {
  Generator gen(11);
  for (int i = 0; i < 500; ++i) {
    const auto ea = 1 + static_cast<std::int64_t>(gen.uniform_index(1000));
    const auto eb = 1 + static_cast<std::int64_t>(gen.uniform_index(1000));
    const auto ha = 1 + static_cast<std::int64_t>(gen.uniform_index(static_cast<std::uint64_t>(ea)));
    const auto hb = static_cast<std::int64_t>(gen.uniform_index(static_cast<std::uint64_t>(eb) + 1));
    const auto m = 1 + static_cast<std::int64_t>(gen.uniform_index(50));
    EXPECT_NEAR(*disparate_impact(counts(ha, ea, hb, eb)), *disparate_impact(counts(ha * m, ea * m, hb * m, eb * m)),
                1e-12);
    // More B hires never lowers DI.
    EXPECT_LE(*disparate_impact(counts(ha, ea, hb, eb)), *disparate_impact(counts(ha, ea, hb + 1, eb)));
  }
}

TEST(ScaledBenefitTest, Examples) {
  EXPECT_DOUBLE_EQ(scaled_benefit(0.75, 0.75), 0.0);
  EXPECT_DOUBLE_EQ(scaled_benefit(1.0, 0.75), 1.0);
  EXPECT_DOUBLE_EQ(scaled_benefit(0.875, 0.75), 0.5);
  EXPECT_DOUBLE_EQ(scaled_benefit(1.25, 0.75), 2.0);
  EXPECT_DOUBLE_EQ(scaled_benefit(0.5, 0.75), -1.0);
  EXPECT_THROW(scaled_benefit(0.9, 1.0), std::domain_error);
  EXPECT_THROW(scaled_benefit(0.9, 1.2), std::domain_error);
}

TEST(ScaledBenefitTest, MonotoneInDi) {
  for (double base : {0.1, 0.5, 0.75, 0.99})
    for (double di = 0.0; di < 2.0; di += 0.01) EXPECT_LT(scaled_benefit(di, base), scaled_benefit(di + 0.01, base));
}

TEST(CompositionTest, PerSectorShares) {
  WindowCounts c;
  c.acceptance.hired(Group::A, Sector::Compliant) = 30;
  c.acceptance.hired(Group::B, Sector::Compliant) = 10;
  c.acceptance.hired(Group::A, Sector::NonCompliant) = 50;
  const auto share = composition_by_sector(c);
  EXPECT_DOUBLE_EQ(*share[index(Sector::Compliant)], 0.25);
  EXPECT_DOUBLE_EQ(*share[index(Sector::NonCompliant)], 0.0);
  EXPECT_FALSE(composition_by_sector(WindowCounts{})[0].has_value());
}

TEST(HireRatesTest, CellsAndMissing) {
  WindowCounts c;
  c.acceptance.apps(Group::A, Sector::Compliant) = 200;
  c.acceptance.hired(Group::A, Sector::Compliant) = 50;
  c.acceptance.apps(Group::B, Sector::NonCompliant) = 40;
  c.acceptance.hired(Group::B, Sector::NonCompliant) = 4;
  const auto rates = hire_rates(c);
  EXPECT_DOUBLE_EQ(*rates[0][index(Sector::Compliant)], 0.25);
  EXPECT_DOUBLE_EQ(*rates[1][index(Sector::NonCompliant)], 0.1);
  EXPECT_FALSE(rates[0][index(Sector::NonCompliant)].has_value());
  EXPECT_FALSE(rates[1][index(Sector::Compliant)].has_value());
}

TEST(EquilibriumProbabilitiesTest, MeanOverWindow) {
  std::vector<RoundRecord> window(4);
  const double pb[] = {0.5, 0.6, 0.7, 0.8};
  for (std::size_t i = 0; i < 4; ++i) {
    window[i].p_compliant = {0.2, pb[i]};
    window[i].compliant_share = 0.2;
  }
  const auto eq = equilibrium_probabilities(window);
  EXPECT_EQ(eq.mean_p_compliant[0], 0.2);
  EXPECT_NEAR(eq.mean_p_compliant[1], 0.65, 1e-15);
  EXPECT_EQ(eq.no_preference, 0.2);
}

TEST(EquilibriumProbabilitiesTest, RandomStrategyEqualsCompliantShareExactly) {
  const MarketConfig cfg = testing::small_config(StrategyKind::Random, 3);
  const auto res = run_trial(cfg, 0);
  const auto eq = equilibrium_probabilities(res.window);
  EXPECT_EQ(eq.mean_p_compliant[0], 0.3);
  EXPECT_EQ(eq.mean_p_compliant[1], 0.3);
  EXPECT_EQ(eq.no_preference, 0.3);
}

TEST(SummarizeTest, ConsistentWithParts) {
  const MarketConfig cfg = testing::small_config(StrategyKind::AdaptivePreference, 4);
  const auto res = run_trial(cfg, 0);
  const auto s = summarize(res);
  EXPECT_EQ(s.di, disparate_impact(std::span<const RoundRecord>(res.window)));
  std::int64_t apps = 0;
  for (const auto& r : res.window) apps += r.total_applications();
  EXPECT_NEAR(s.pool_size_mean, static_cast<double>(apps) / static_cast<double>(res.window.size()), 1e-9);
  for (std::size_t g = 0; g < 2; ++g) {
    ASSERT_TRUE(s.rate_gap[g].has_value());
    EXPECT_DOUBLE_EQ(*s.rate_gap[g], *s.acceptance_rate[g][0] - *s.acceptance_rate[g][1]);
  }
}

}  // namespace
}  // namespace parity_market
