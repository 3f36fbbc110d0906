#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <span>
#include <vector>

#include "parity_market/generator.hpp"
#include "parity_market/model.hpp"

namespace parity_market {

inline constexpr double kLogitClamp = 12.0;

inline double logistic(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }

inline double clamp_logit(double x) noexcept { return std::clamp(x, -kLogitClamp, kLogitClamp); }

/// logit(p), clamped so that p of 0 or 1 maps to the clamp bounds.
inline double logit(double p) noexcept {
  if (p <= 0.0) return -kLogitClamp;
  if (p >= 1.0) return kLogitClamp;
  return clamp_logit(std::log(p / (1.0 - p)));
}

/// Group-level log-odds of targeting the compliant sector.
struct GroupApplicationState {
  double logit_a = 0.0;
  double logit_b = 0.0;

  [[nodiscard]] double logit(Group g) const noexcept { return g == Group::A ? logit_a : logit_b; }
  double& logit(Group g) noexcept { return g == Group::A ? logit_a : logit_b; }

  /// No initial preference: both groups start at the compliant employer share.
  static GroupApplicationState neutral(const MarketConfig& cfg) noexcept {
    const double share = cfg.n_employers > 0
                             ? static_cast<double>(cfg.n_compliant) / cfg.n_employers
                             : 0.0;
    const double l = parity_market::logit(share);
    return {l, l};
  }

  friend bool operator==(const GroupApplicationState&, const GroupApplicationState&) = default;
};

/// Applications and hires per (group, sector) in one round or window.
struct RoundAcceptance {
  std::array<std::array<std::int64_t, 2>, 2> applications{};  // [group][sector]
  std::array<std::array<std::int64_t, 2>, 2> hires{};

  std::int64_t& apps(Group g, Sector s) noexcept { return applications[index(g)][index(s)]; }
  std::int64_t& hired(Group g, Sector s) noexcept { return hires[index(g)][index(s)]; }
  [[nodiscard]] std::int64_t apps(Group g, Sector s) const noexcept {
    return applications[index(g)][index(s)];
  }
  [[nodiscard]] std::int64_t hired(Group g, Sector s) const noexcept {
    return hires[index(g)][index(s)];
  }

  RoundAcceptance& operator+=(const RoundAcceptance& o) noexcept {
    for (std::size_t g = 0; g < 2; ++g)
      for (std::size_t s = 0; s < 2; ++s) {
        applications[g][s] += o.applications[g][s];
        hires[g][s] += o.hires[g][s];
      }
    return *this;
  }

  friend bool operator==(const RoundAcceptance&, const RoundAcceptance&) = default;
};

/// Probability that a member of `group` applies to the compliant sector.
inline double probability_compliant(StrategyKind strategy, Group group, const MarketConfig& cfg,
                                    const GroupApplicationState& state) noexcept {
  const int compliant = cfg.n_compliant;
  const int generic = cfg.n_employers - cfg.n_compliant;
  if (compliant <= 0) return 0.0;
  if (generic <= 0) return 1.0;

  switch (strategy) {
    case StrategyKind::Random:
      return static_cast<double>(compliant) / cfg.n_employers;
    case StrategyKind::StaticPreference: {
      // B leans toward compliant employers, A toward generic ones; each
      // sector's weight scales with its size.
      const double toward_compliant = group == Group::B ? cfg.static_pref : 1.0 - cfg.static_pref;
      const double wc = toward_compliant * compliant;
      const double wn = (1.0 - toward_compliant) * generic;
      return wc + wn > 0.0 ? wc / (wc + wn) : 0.0;
    }
    case StrategyKind::AdaptivePreference:
      return logistic(state.logit(group));
  }
  return 0.0;
}

/// Employer indices split by sector, for constant-time sector draws.
struct SectorIndex {
  std::vector<std::int32_t> compliant;
  std::vector<std::int32_t> non_compliant;

  explicit SectorIndex(std::span<const Employer> employers) {
    for (std::size_t i = 0; i < employers.size(); ++i)
      (employers[i].compliant() ? compliant : non_compliant).push_back(static_cast<std::int32_t>(i));
  }
};

/// Sector by bernoulli(p_compliant), then an employer uniformly within it.
/// Returns the position of the employer in the list the index was built from.
inline std::int32_t choose_employer(Generator& gen, double p_compliant, const SectorIndex& sectors) {
  const auto& pick = bernoulli(gen, p_compliant) ? sectors.compliant : sectors.non_compliant;
  assert(!pick.empty());
  return pick[gen.uniform_index(pick.size())];
}

/// Convenience overload returning the employer id.
inline std::int32_t choose_employer(Generator& gen, Group /*group*/, double p_compliant,
                                    std::span<const Employer> employers) {
  const SectorIndex sectors(employers);
  return employers[static_cast<std::size_t>(choose_employer(gen, p_compliant, sectors))].id;
}

/// One log-odds step per group toward the sector with the higher acceptance
/// rate. Ties step away from the compliant sector; a group missing from either
/// sector keeps its logit.
inline GroupApplicationState update_adaptive(GroupApplicationState state, const RoundAcceptance& acc,
                                             double stepsize) noexcept {
  for (Group g : kGroups) {
    const auto apps_c = acc.apps(g, Sector::Compliant);
    const auto apps_n = acc.apps(g, Sector::NonCompliant);
    if (apps_c == 0 || apps_n == 0) continue;
    // Exact rational comparison of hires_c / apps_c against hires_n / apps_n.
    const bool compliant_better =
        acc.hired(g, Sector::Compliant) * apps_n > acc.hired(g, Sector::NonCompliant) * apps_c;
    state.logit(g) = clamp_logit(state.logit(g) + (compliant_better ? stepsize : -stepsize));
  }
  return state;
}

}  // namespace parity_market
