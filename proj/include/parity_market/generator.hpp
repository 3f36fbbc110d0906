#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>

namespace parity_market {

/// Name recorded in result metadata so runs can be matched to the stream layout.
inline constexpr std::string_view kGeneratorAlgorithm =
    "xoshiro256** seeded by splitmix64 label chain; normals by Marsaglia polar method";

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

constexpr std::uint64_t chain(std::uint64_t key, std::uint64_t label, std::uint64_t position) noexcept {
  return mix64(key ^ mix64(label + (position + 1) * kGolden));
}

}  // namespace detail

/// Seedable pseudo-random source.
///
/// Every generator is identified by a 64-bit key obtained by chaining its
/// labels into the seed. The xoshiro256** state is expanded from that key with
/// splitmix64, so a generator is a pure function of (seed, labels). Substreams
/// extend the label chain and never share state with their parent.
class Generator {
 public:
  explicit Generator(std::uint64_t seed) noexcept : Generator(seed, {}) {}

  Generator(std::uint64_t seed, std::span<const std::uint64_t> labels) noexcept {
    std::uint64_t key = detail::mix64(seed ^ 0x5851f42d4c957f2dULL);
    std::uint64_t position = 0;
    for (std::uint64_t label : labels) key = detail::chain(key, label, position++);
    key_ = detail::mix64(key ^ (position * 0xd1b54a32d192ed03ULL));
    reseed(key_);
  }

  /// Independent stream keyed by this generator's key plus further labels.
  /// Does not consume variates from *this.
  [[nodiscard]] Generator substream(std::initializer_list<std::uint64_t> labels) const noexcept {
    return Generator(key_, std::span<const std::uint64_t>(labels.begin(), labels.size()));
  }

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = detail::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, n). Lemire's multiply-and-reject, so the result
  /// depends only on the raw 64-bit stream.
  std::uint64_t uniform_index(std::uint64_t n) noexcept {
    assert(n > 0);
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Standard normal variate. The polar method yields pairs; the second
  /// member is cached and returned by the next call.
  double standard_normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  friend bool operator==(const Generator&, const Generator&) = default;

 private:
  void reseed(std::uint64_t key) noexcept {
    std::uint64_t x = key;
    for (auto& word : s_) {
      x += detail::kGolden;
      word = detail::mix64(x);
    }
  }

  std::uint64_t key_ = 0;
  std::uint64_t s_[4] = {};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Pure function of (seed, labels).
inline Generator derive(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) {
  return Generator(seed, std::span<const std::uint64_t>(labels.begin(), labels.size()));
}

inline Generator derive(std::uint64_t seed, std::span<const std::uint64_t> labels) {
  return Generator(seed, labels);
}

/// True with probability p. Exactly one uniform variate is consumed.
inline bool bernoulli(Generator& gen, double p) noexcept {
  assert(p >= 0.0 && p <= 1.0);
  return gen.uniform() < p;
}

}  // namespace parity_market
