#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "parity_market/generator.hpp"

namespace parity_market {

enum class Group : std::uint8_t { A = 0, B = 1 };
inline constexpr std::array<Group, 2> kGroups = {Group::A, Group::B};

constexpr std::size_t index(Group g) noexcept { return static_cast<std::size_t>(g); }

enum class Sector : std::uint8_t { Compliant = 0, NonCompliant = 1 };
inline constexpr std::array<Sector, 2> kSectors = {Sector::Compliant, Sector::NonCompliant};

constexpr std::size_t index(Sector s) noexcept { return static_cast<std::size_t>(s); }

/// Count per group, indexed by index(Group).
using GroupCounts = std::array<std::int64_t, 2>;

/// Applicant ids pack (trial, step, within-step counter) as 16 | 24 | 24 bits.
constexpr std::uint64_t make_applicant_id(std::uint64_t trial, std::uint64_t step,
                                          std::uint64_t counter) noexcept {
  return ((trial & 0xffffULL) << 48) | ((step & 0xffffffULL) << 24) | (counter & 0xffffffULL);
}

struct Applicant {
  std::uint64_t id = 0;
  Group group = Group::A;
  double score = 0.0;         // perceived skill, set once at entry
  std::int32_t rounds_waiting = 0;  // rounds already spent in the pool
};

enum class PolicyKind : std::uint8_t { Generic, LocalParity, GlobalParity };

struct Employer {
  std::int32_t id = 0;
  PolicyKind policy = PolicyKind::Generic;
  std::int32_t spots = 10;

  [[nodiscard]] bool compliant() const noexcept { return policy != PolicyKind::Generic; }
  [[nodiscard]] Sector sector() const noexcept {
    return compliant() ? Sector::Compliant : Sector::NonCompliant;
  }
};

enum class StrategyKind : std::uint8_t { Random, StaticPreference, AdaptivePreference };

inline constexpr int kStaticBurnIn = 100;
inline constexpr int kAdaptiveBurnIn = 200;

constexpr int default_burn_in(StrategyKind s) noexcept {
  return s == StrategyKind::AdaptivePreference ? kAdaptiveBurnIn : kStaticBurnIn;
}

struct MarketConfig {
  int n_employers = 50;
  int n_compliant = 0;
  PolicyKind compliant_policy = PolicyKind::GlobalParity;
  StrategyKind strategy = StrategyKind::Random;
  double fraction_b = 0.25;
  double mean_a = 0.0;
  double mean_b = -0.3;
  double score_variance = 1.0;
  int new_per_step = 1250;
  int spots = 10;
  int max_wait = 10;
  double static_pref = 0.55;
  double stepsize = 0.05;
  int burn_in_steps = kStaticBurnIn;
  int measure_steps = kStaticBurnIn;
  int trials = 10;
  std::uint64_t seed = 20240601;

  /// Defaults with the protocol lengths matching `strategy`.
  static MarketConfig defaults(StrategyKind strategy = StrategyKind::Random) {
    MarketConfig cfg;
    cfg.strategy = strategy;
    cfg.burn_in_steps = cfg.measure_steps = default_burn_in(strategy);
    return cfg;
  }

  friend bool operator==(const MarketConfig&, const MarketConfig&) = default;
};

/// Employers 0..n_compliant-1 run the compliant policy; the rest are generic.
inline std::vector<Employer> make_employers(const MarketConfig& cfg) {
  std::vector<Employer> employers;
  employers.reserve(static_cast<std::size_t>(std::max(cfg.n_employers, 0)));
  for (int e = 0; e < cfg.n_employers; ++e) {
    employers.push_back({e, e < cfg.n_compliant ? cfg.compliant_policy : PolicyKind::Generic,
                         cfg.spots});
  }
  return employers;
}

/// Every violated invariant, in field order. Empty means the config is valid.
inline std::vector<std::string> validate_config(const MarketConfig& cfg) {
  std::vector<std::string> errors;
  auto probability = [&](double v, std::string_view name) {
    if (!(v >= 0.0 && v <= 1.0)) errors.push_back(std::string(name) + " must lie in [0, 1]");
  };
  auto positive = [&](auto v, std::string_view name) {
    if (!(v > 0)) errors.push_back(std::string(name) + " must be positive");
  };

  positive(cfg.n_employers, "n_employers");
  if (cfg.n_compliant < 0 || cfg.n_compliant > cfg.n_employers)
    errors.emplace_back("n_compliant out of range");
  if (cfg.compliant_policy == PolicyKind::Generic)
    errors.emplace_back("compliant_policy must be a parity policy");
  probability(cfg.fraction_b, "fraction_b");
  if (!std::isfinite(cfg.mean_a)) errors.emplace_back("mean_a must be finite");
  if (!std::isfinite(cfg.mean_b)) errors.emplace_back("mean_b must be finite");
  if (!(cfg.score_variance > 0.0 && std::isfinite(cfg.score_variance)))
    errors.emplace_back("score_variance must be positive");
  positive(cfg.new_per_step, "new_per_step");
  positive(cfg.spots, "spots");
  positive(cfg.max_wait, "max_wait");
  probability(cfg.static_pref, "static_pref");
  if (!(cfg.stepsize > 0.0 && std::isfinite(cfg.stepsize)))
    errors.emplace_back("stepsize must be positive");
  positive(cfg.burn_in_steps, "burn_in_steps");
  positive(cfg.measure_steps, "measure_steps");
  if (cfg.burn_in_steps != cfg.measure_steps)
    errors.emplace_back("burn-in must equal measurement window");
  positive(cfg.trials, "trials");
  if (cfg.trials > 0xffff) errors.emplace_back("trials must fit in 16 bits");
  if (cfg.new_per_step > 0xffffff) errors.emplace_back("new_per_step must fit in 24 bits");
  return errors;
}

/// B with probability fraction_b. Draws exactly one variate.
inline Group assign_group(Generator& gen, const MarketConfig& cfg) noexcept {
  return bernoulli(gen, cfg.fraction_b) ? Group::B : Group::A;
}

}  // namespace parity_market
