#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "parity_market/generator.hpp"
#include "parity_market/model.hpp"

namespace parity_market {

struct HiringOutcome {
  std::vector<std::uint64_t> hired;    // applicant ids in hiring order
  std::vector<std::uint32_t> positions;  // matching positions in the pool span
  GroupCounts hired_by_group{};
  GroupCounts pool_by_group{};

  [[nodiscard]] std::int64_t total_hired() const noexcept {
    return hired_by_group[0] + hired_by_group[1];
  }
  friend bool operator==(const HiringOutcome&, const HiringOutcome&) = default;
};

/// Higher score first; equal scores by ascending id.
inline bool ranks_before(const Applicant& x, const Applicant& y) noexcept {
  if (x.score != y.score) return x.score > y.score;
  return x.id < y.id;
}

inline GroupCounts count_by_group(std::span<const Applicant> pool) noexcept {
  GroupCounts counts{};
  for (const auto& a : pool) ++counts[index(a.group)];
  return counts;
}

/// Share of hires a parity employer aims to give group B.
inline double target_fraction_b(PolicyKind policy, const GroupCounts& pool_by_group,
                                const MarketConfig& cfg) noexcept {
  if (policy == PolicyKind::GlobalParity) return cfg.fraction_b;
  const auto total = pool_by_group[0] + pool_by_group[1];
  return total > 0 ? static_cast<double>(pool_by_group[index(Group::B)]) / total : 0.0;
}

namespace detail {

// Positions of the best `k` entries of `candidates`, best first.
inline void top_k(std::span<const Applicant> pool, std::vector<std::uint32_t>& candidates,
                  std::size_t k) {
  k = std::min(k, candidates.size());
  auto cmp = [&](std::uint32_t i, std::uint32_t j) { return ranks_before(pool[i], pool[j]); };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                    candidates.end(), cmp);
  candidates.resize(k);
}

}  // namespace detail

/// Hires up to `spots` applicants from `pool` under `policy`.
///
/// Generic takes the top scores. Parity policies fill slot by slot: a
/// bernoulli(target) draw picks group B or A, and the best remaining member of
/// that group is hired, falling back to the other group when it is exhausted.
/// Parity employers draw once per slot, including fallback slots.
inline HiringOutcome select_hires(Generator& gen, PolicyKind policy, std::span<const Applicant> pool,
                                  int spots, const MarketConfig& cfg) {
  HiringOutcome out;
  out.pool_by_group = count_by_group(pool);
  const auto capacity = static_cast<std::size_t>(std::max(spots, 0));
  const std::size_t n_hire = std::min(capacity, pool.size());
  out.hired.reserve(n_hire);
  out.positions.reserve(n_hire);

  auto hire = [&](std::uint32_t pos) {
    out.positions.push_back(pos);
    out.hired.push_back(pool[pos].id);
    ++out.hired_by_group[index(pool[pos].group)];
  };

  if (policy == PolicyKind::Generic) {
    std::vector<std::uint32_t> all(pool.size());
    for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
    detail::top_k(pool, all, n_hire);
    for (auto pos : all) hire(pos);
    return out;
  }

  const double p = target_fraction_b(policy, out.pool_by_group, cfg);
  std::vector<std::uint32_t> ranked[2];
  ranked[0].reserve(static_cast<std::size_t>(out.pool_by_group[0]));
  ranked[1].reserve(static_cast<std::size_t>(out.pool_by_group[1]));
  for (std::uint32_t i = 0; i < pool.size(); ++i) ranked[index(pool[i].group)].push_back(i);
  for (auto& r : ranked) detail::top_k(pool, r, n_hire);

  std::size_t next[2] = {0, 0};
  for (std::size_t slot = 0; slot < n_hire; ++slot) {
    std::size_t g = bernoulli(gen, p) ? index(Group::B) : index(Group::A);
    if (next[g] == ranked[g].size()) g = 1 - g;
    hire(ranked[g][next[g]++]);
  }
  return out;
}

}  // namespace parity_market
