#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "parity_market/config_io.hpp"
#include "parity_market/model.hpp"

namespace parity_market {

struct ScenarioPreset {
  std::string name;
  std::string description;
  MarketConfig config;
};

/// {global, local} x {random, static, adaptive} x {25%, 50% group B}.
inline std::vector<ScenarioPreset> scenario_presets() {
  std::vector<ScenarioPreset> out;
  const std::pair<PolicyKind, const char*> policies[] = {{PolicyKind::GlobalParity, "global"},
                                                         {PolicyKind::LocalParity, "local"}};
  const std::pair<StrategyKind, const char*> strategies[] = {
      {StrategyKind::Random, "random"},
      {StrategyKind::StaticPreference, "static"},
      {StrategyKind::AdaptivePreference, "adaptive"}};
  const std::pair<double, const char*> mixes[] = {{0.25, "25"}, {0.50, "50"}};
  for (const auto& [mix, mix_name] : mixes)
    for (const auto& [strategy, strategy_name] : strategies)
      for (const auto& [policy, policy_name] : policies) {
        ScenarioPreset p;
        p.name = std::string(policy_name) + "-" + strategy_name + "-" + mix_name;
        p.config = MarketConfig::defaults(strategy);
        p.config.compliant_policy = policy;
        p.config.fraction_b = mix;
        p.description = std::string(to_string(policy)) + " employers, " +
                        std::string(to_string(strategy)) + " applicants, " + mix_name +
                        "% group B";
        out.push_back(std::move(p));
      }
  return out;
}

inline std::optional<ScenarioPreset> find_preset(const std::string& name) {
  for (auto& p : scenario_presets())
    if (p.name == name) return p;
  return std::nullopt;
}

/// Shrinks (or grows) the market: employer count and arrivals scale together,
/// compliance scales with the employer count. Spots and protocol lengths stay.
inline MarketConfig scale_market(MarketConfig cfg, double factor) {
  auto scaled = [factor](int v) { return std::max(1, static_cast<int>(std::lround(v * factor))); };
  const int employers = cfg.n_employers;
  cfg.n_employers = scaled(cfg.n_employers);
  cfg.new_per_step = scaled(cfg.new_per_step);
  cfg.n_compliant = employers > 0 ? static_cast<int>(std::lround(
                                        static_cast<double>(cfg.n_compliant) * cfg.n_employers / employers))
                                  : 0;
  return cfg;
}

}  // namespace parity_market
