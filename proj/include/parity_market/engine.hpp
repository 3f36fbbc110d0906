#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "parity_market/generator.hpp"
#include "parity_market/model.hpp"
#include "parity_market/policy.hpp"
#include "parity_market/sampling.hpp"
#include "parity_market/strategy.hpp"

namespace parity_market {

/// Substream purposes within one step.
enum class StreamPurpose : std::uint64_t { Spawn = 0, ApplicantChoice = 1, EmployerSelection = 2 };

struct MarketState {
  std::vector<Applicant> pool;
  std::vector<Employer> employers;
  GroupApplicationState group_state;
  std::int64_t step_index = 0;
  std::int32_t trial_index = 0;

  static MarketState initial(const MarketConfig& cfg, std::int32_t trial_index = 0) {
    MarketState s;
    s.employers = make_employers(cfg);
    s.group_state = GroupApplicationState::neutral(cfg);
    s.trial_index = trial_index;
    return s;
  }
};

struct RoundRecord {
  std::int64_t step_index = 0;
  std::vector<HiringOutcome> outcomes;  // one per employer, in employer order
  RoundAcceptance acceptance;
  GroupCounts entrants{};
  GroupCounts evictions{};
  GroupCounts pool_before{};  // before spawning
  GroupCounts pool_after{};   // after hiring and eviction
  std::array<double, 2> p_compliant{};  // probabilities used for this round's choices
  double compliant_share = 0.0;         // n_compliant / n_employers

  [[nodiscard]] std::int64_t hires(Group g) const noexcept {
    return acceptance.hired(g, Sector::Compliant) + acceptance.hired(g, Sector::NonCompliant);
  }
  [[nodiscard]] std::int64_t applications(Group g) const noexcept {
    return acceptance.apps(g, Sector::Compliant) + acceptance.apps(g, Sector::NonCompliant);
  }
  [[nodiscard]] std::int64_t total_hires() const noexcept { return hires(Group::A) + hires(Group::B); }
  [[nodiscard]] std::int64_t total_applications() const noexcept {
    return applications(Group::A) + applications(Group::B);
  }
};

/// Runs one round in place: spawn, apply, hire, remove hired, age and evict,
/// then the adaptive update. All randomness comes from substreams of
/// `trial_stream` keyed by (step, purpose[, employer]).
inline RoundRecord step(MarketState& state, const MarketConfig& cfg, const Generator& trial_stream) {
  RoundRecord rec;
  rec.step_index = state.step_index;
  rec.compliant_share =
      cfg.n_employers > 0 ? static_cast<double>(cfg.n_compliant) / cfg.n_employers : 0.0;
  rec.pool_before = count_by_group(state.pool);
  const auto step_label = static_cast<std::uint64_t>(state.step_index);

  // Spawn.
  {
    Generator gen = trial_stream.substream({step_label, static_cast<std::uint64_t>(StreamPurpose::Spawn)});
    state.pool.reserve(state.pool.size() + static_cast<std::size_t>(std::max(cfg.new_per_step, 0)));
    for (int i = 0; i < cfg.new_per_step; ++i) {
      const auto id = make_applicant_id(static_cast<std::uint64_t>(state.trial_index), step_label,
                                        static_cast<std::uint64_t>(i));
      state.pool.push_back(spawn_applicant(gen, cfg, id));
      ++rec.entrants[index(state.pool.back().group)];
    }
  }

  // Apply.
  for (Group g : kGroups)
    rec.p_compliant[index(g)] = probability_compliant(cfg.strategy, g, cfg, state.group_state);

  const std::size_t n_pool = state.pool.size();
  const std::size_t n_emp = state.employers.size();
  std::vector<std::int32_t> choice(n_pool);
  std::vector<std::uint32_t> bucket_start(n_emp + 1, 0);
  if (n_pool > 0) {
    const SectorIndex sectors(state.employers);
    Generator gen = trial_stream.substream(
        {step_label, static_cast<std::uint64_t>(StreamPurpose::ApplicantChoice)});
    for (std::size_t i = 0; i < n_pool; ++i) {
      choice[i] = choose_employer(gen, rec.p_compliant[index(state.pool[i].group)], sectors);
      ++bucket_start[static_cast<std::size_t>(choice[i]) + 1];
    }
  }
  for (std::size_t e = 0; e < n_emp; ++e) bucket_start[e + 1] += bucket_start[e];

  // Applicants grouped by employer, pool order preserved within each group.
  std::vector<Applicant> received(n_pool);
  std::vector<std::uint32_t> origin(n_pool);
  {
    std::vector<std::uint32_t> fill(bucket_start.begin(), bucket_start.end() - 1);
    for (std::size_t i = 0; i < n_pool; ++i) {
      const auto slot = fill[static_cast<std::size_t>(choice[i])]++;
      received[slot] = state.pool[i];
      origin[slot] = static_cast<std::uint32_t>(i);
    }
  }

  // Hire.
  std::vector<char> hired(n_pool, 0);
  rec.outcomes.reserve(n_emp);
  for (std::size_t e = 0; e < n_emp; ++e) {
    const Employer& employer = state.employers[e];
    const auto begin = bucket_start[e];
    const std::span<const Applicant> bucket(received.data() + begin, bucket_start[e + 1] - begin);
    Generator gen = trial_stream.substream(
        {step_label, static_cast<std::uint64_t>(StreamPurpose::EmployerSelection),
         static_cast<std::uint64_t>(e)});
    HiringOutcome outcome = select_hires(gen, employer.policy, bucket, employer.spots, cfg);
    for (auto pos : outcome.positions) hired[origin[begin + pos]] = 1;
    for (Group g : kGroups) {
      rec.acceptance.apps(g, employer.sector()) += outcome.pool_by_group[index(g)];
      rec.acceptance.hired(g, employer.sector()) += outcome.hired_by_group[index(g)];
    }
    rec.outcomes.push_back(std::move(outcome));
  }

  // Remove hired; age survivors and evict those who used their last round.
  std::size_t kept = 0;
  for (std::size_t i = 0; i < n_pool; ++i) {
    if (hired[i]) continue;
    Applicant a = state.pool[i];
    ++a.rounds_waiting;
    if (a.rounds_waiting >= cfg.max_wait) {
      ++rec.evictions[index(a.group)];
      continue;
    }
    state.pool[kept++] = a;
  }
  state.pool.resize(kept);
  rec.pool_after = count_by_group(state.pool);

  if (cfg.strategy == StrategyKind::AdaptivePreference)
    state.group_state = update_adaptive(state.group_state, rec.acceptance, cfg.stepsize);

  ++state.step_index;
  return rec;
}

struct TrialResult {
  std::int32_t trial_index = 0;
  std::int64_t rounds_executed = 0;
  std::vector<RoundRecord> window;  // measurement rounds only
  GroupApplicationState final_state;
  std::array<double, 2> p_trend{};  // least-squares slope of p_compliant over the last rounds
};

inline constexpr std::size_t kTrendRounds = 50;

/// Slope per round of p_compliant over the final min(50, |window|) rounds.
inline std::array<double, 2> p_compliant_trend(std::span<const RoundRecord> window) {
  std::array<double, 2> slope{};
  const std::size_t n = std::min(kTrendRounds, window.size());
  if (n < 2) return slope;
  const auto tail = window.subspan(window.size() - n);
  const double x_mean = (static_cast<double>(n) - 1.0) / 2.0;
  for (std::size_t g = 0; g < 2; ++g) {
    double y_mean = 0.0;
    for (const auto& r : tail) y_mean += r.p_compliant[g];
    y_mean /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = static_cast<double>(i) - x_mean;
      sxy += dx * (tail[i].p_compliant[g] - y_mean);
      sxx += dx * dx;
    }
    slope[g] = sxy / sxx;
  }
  return slope;
}

using RoundObserver = std::function<void(const RoundRecord&, const MarketState&)>;

/// Burn-in then measurement. The trial stream is derive(seed, [n_compliant, trial]).
inline TrialResult run_trial(const MarketConfig& cfg, std::int32_t trial_index,
                             const RoundObserver& observer = {}) {
  const Generator stream = derive(cfg.seed, {static_cast<std::uint64_t>(cfg.n_compliant),
                                             static_cast<std::uint64_t>(trial_index)});
  MarketState state = MarketState::initial(cfg, trial_index);
  TrialResult result;
  result.trial_index = trial_index;
  result.window.reserve(static_cast<std::size_t>(std::max(cfg.measure_steps, 0)));
  const std::int64_t total = static_cast<std::int64_t>(cfg.burn_in_steps) + cfg.measure_steps;
  for (std::int64_t t = 0; t < total; ++t) {
    RoundRecord rec = step(state, cfg, stream);
    if (observer) observer(rec, state);
    if (t >= cfg.burn_in_steps) result.window.push_back(std::move(rec));
  }
  result.rounds_executed = total;
  result.final_state = state.group_state;
  result.p_trend = p_compliant_trend(result.window);
  return result;
}

}  // namespace parity_market
