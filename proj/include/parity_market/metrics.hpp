#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>

#include "parity_market/engine.hpp"
#include "parity_market/model.hpp"
#include "parity_market/strategy.hpp"

namespace parity_market {

using Missing = std::optional<double>;

/// Window totals of the per-round counts.
struct WindowCounts {
  RoundAcceptance acceptance;
  GroupCounts entrants{};
  GroupCounts evictions{};
};

inline WindowCounts window_counts(std::span<const RoundRecord> window) noexcept {
  WindowCounts c;
  for (const auto& r : window) {
    c.acceptance += r.acceptance;
    for (std::size_t g = 0; g < 2; ++g) {
      c.entrants[g] += r.entrants[g];
      c.evictions[g] += r.evictions[g];
    }
  }
  return c;
}

/// P(hired | g) is estimated per cohort: window hires of g over window entrants of g.
inline Missing disparate_impact(const WindowCounts& c) noexcept {
  const auto hires_a = c.acceptance.hired(Group::A, Sector::Compliant) +
                       c.acceptance.hired(Group::A, Sector::NonCompliant);
  const auto hires_b = c.acceptance.hired(Group::B, Sector::Compliant) +
                       c.acceptance.hired(Group::B, Sector::NonCompliant);
  const auto entrants_a = c.entrants[index(Group::A)];
  const auto entrants_b = c.entrants[index(Group::B)];
  if (entrants_a == 0 || hires_a == 0 || entrants_b == 0) return std::nullopt;
  const double p_b = static_cast<double>(hires_b) / static_cast<double>(entrants_b);
  const double p_a = static_cast<double>(hires_a) / static_cast<double>(entrants_a);
  return p_b / p_a;
}

inline Missing disparate_impact(std::span<const RoundRecord> window) noexcept {
  return disparate_impact(window_counts(window));
}

/// Disparate impact rescaled so the baseline maps to 0 and parity to 1.
/// Values outside [0, 1] are kept.
inline double scaled_benefit(double di, double di_baseline) {
  if (!(di_baseline < 1.0)) throw std::domain_error("degenerate baseline");
  return (di - di_baseline) / (1.0 - di_baseline);
}

/// Group-B share of hires per sector, indexed by index(Sector).
inline std::array<Missing, 2> composition_by_sector(const WindowCounts& c) noexcept {
  std::array<Missing, 2> share;
  for (Sector s : kSectors) {
    const auto b = c.acceptance.hired(Group::B, s);
    const auto total = c.acceptance.hired(Group::A, s) + b;
    if (total > 0) share[index(s)] = static_cast<double>(b) / static_cast<double>(total);
  }
  return share;
}

inline std::array<Missing, 2> composition_by_sector(std::span<const RoundRecord> window) noexcept {
  return composition_by_sector(window_counts(window));
}

/// Hires over applications per [group][sector]; cells without applications are missing.
using RateGrid = std::array<std::array<Missing, 2>, 2>;

inline RateGrid hire_rates(const WindowCounts& c) noexcept {
  RateGrid rates;
  for (Group g : kGroups)
    for (Sector s : kSectors) {
      const auto apps = c.acceptance.apps(g, s);
      if (apps > 0)
        rates[index(g)][index(s)] =
            static_cast<double>(c.acceptance.hired(g, s)) / static_cast<double>(apps);
    }
  return rates;
}

inline RateGrid hire_rates(std::span<const RoundRecord> window) noexcept {
  return hire_rates(window_counts(window));
}

struct EquilibriumProbabilities {
  std::array<double, 2> mean_p_compliant{};  // per group
  double no_preference = 0.0;                // n_compliant / n_employers
};

namespace detail {

// Mean anchored at the first value: a constant series averages to itself exactly.
template <typename F>
double anchored_mean(std::span<const RoundRecord> window, F value) {
  if (window.empty()) return 0.0;
  const double anchor = value(window.front());
  double offset = 0.0;
  for (const auto& r : window) offset += value(r) - anchor;
  return anchor + offset / static_cast<double>(window.size());
}

}  // namespace detail

inline EquilibriumProbabilities equilibrium_probabilities(std::span<const RoundRecord> window) {
  EquilibriumProbabilities out;
  for (std::size_t g = 0; g < 2; ++g)
    out.mean_p_compliant[g] =
        detail::anchored_mean(window, [g](const RoundRecord& r) { return r.p_compliant[g]; });
  if (!window.empty()) out.no_preference = window.front().compliant_share;
  return out;
}

struct WindowSummary {
  Missing di;
  RoundAcceptance totals;  // applications and hires by group and sector
  GroupCounts entrants{};
  std::array<Missing, 2> b_share_of_hires;  // by sector
  RateGrid acceptance_rate;                 // [group][sector]
  EquilibriumProbabilities probabilities;
  double pool_size_mean = 0.0;  // applicants competing per round
  std::array<Missing, 2> rate_gap;  // compliant minus non-compliant rate, per group
  std::array<double, 2> p_trend{};
};

inline WindowSummary summarize(std::span<const RoundRecord> window) {
  const WindowCounts counts = window_counts(window);
  WindowSummary s;
  s.di = disparate_impact(counts);
  s.totals = counts.acceptance;
  s.entrants = counts.entrants;
  s.b_share_of_hires = composition_by_sector(counts);
  s.acceptance_rate = hire_rates(counts);
  s.probabilities = equilibrium_probabilities(window);
  s.pool_size_mean = detail::anchored_mean(
      window, [](const RoundRecord& r) { return static_cast<double>(r.total_applications()); });
  for (std::size_t g = 0; g < 2; ++g) {
    const auto& c = s.acceptance_rate[g][index(Sector::Compliant)];
    const auto& n = s.acceptance_rate[g][index(Sector::NonCompliant)];
    if (c && n) s.rate_gap[g] = *c - *n;
  }
  s.p_trend = p_compliant_trend(window);
  return s;
}

inline WindowSummary summarize(const TrialResult& trial) { return summarize(trial.window); }

}  // namespace parity_market
