#pragma once

#include <cmath>

#include "parity_market/generator.hpp"
#include "parity_market/model.hpp"

namespace parity_market {

/// Normal score with the group's mean and the shared variance.
inline double sample_score(Generator& gen, Group group, const MarketConfig& cfg) noexcept {
  const double mean = group == Group::A ? cfg.mean_a : cfg.mean_b;
  return mean + std::sqrt(cfg.score_variance) * gen.standard_normal();
}

/// New applicant: group first, then score, both from `gen`.
inline Applicant spawn_applicant(Generator& gen, const MarketConfig& cfg, std::uint64_t id) noexcept {
  Applicant a;
  a.id = id;
  a.group = assign_group(gen, cfg);
  a.score = sample_score(gen, a.group, cfg);
  return a;
}

}  // namespace parity_market
