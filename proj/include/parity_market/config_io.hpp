#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "parity_market/model.hpp"

namespace parity_market {

/// Parse or validation failure. Carries every problem found, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

  [[nodiscard]] const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }

  std::vector<std::string> problems_;
};

inline std::string_view to_string(PolicyKind p) noexcept {
  switch (p) {
    case PolicyKind::Generic: return "Generic";
    case PolicyKind::LocalParity: return "LocalParity";
    case PolicyKind::GlobalParity: return "GlobalParity";
  }
  return "?";
}

inline std::string_view to_string(StrategyKind s) noexcept {
  switch (s) {
    case StrategyKind::Random: return "Random";
    case StrategyKind::StaticPreference: return "StaticPreference";
    case StrategyKind::AdaptivePreference: return "AdaptivePreference";
  }
  return "?";
}

inline std::string_view to_string(Group g) noexcept { return g == Group::A ? "A" : "B"; }

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline std::optional<PolicyKind> parse_policy(std::string_view text) {
  const auto s = detail::lower(text);
  if (s == "localparity" || s == "local") return PolicyKind::LocalParity;
  if (s == "globalparity" || s == "global") return PolicyKind::GlobalParity;
  if (s == "generic") return PolicyKind::Generic;
  return std::nullopt;
}

inline std::optional<StrategyKind> parse_strategy(std::string_view text) {
  const auto s = detail::lower(text);
  if (s == "random") return StrategyKind::Random;
  if (s == "staticpreference" || s == "static") return StrategyKind::StaticPreference;
  if (s == "adaptivepreference" || s == "adaptive") return StrategyKind::AdaptivePreference;
  return std::nullopt;
}

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "n_employers", "n_compliant",  "compliant_policy", "strategy",      "fraction_b",
      "mean_a",      "mean_b",       "score_variance",   "new_per_step",  "spots",
      "max_wait",    "static_pref",  "stepsize",         "burn_in_steps", "measure_steps",
      "trials",      "seed"};
  return keys;
}

/// Assigns one field from text. Returns an error message on failure.
inline std::optional<std::string> set_config_field(MarketConfig& cfg, std::string_view key,
                                                   std::string_view value) {
  const std::string k(key);
  auto bad = [&] { return "invalid value for " + k + ": '" + std::string(value) + "'"; };
  auto set_int = [&](int& field) -> std::optional<std::string> {
    auto v = detail::parse_number<int>(value);
    if (!v) return bad();
    field = *v;
    return std::nullopt;
  };
  auto set_real = [&](double& field) -> std::optional<std::string> {
    auto v = detail::parse_number<double>(value);
    if (!v) return bad();
    field = *v;
    return std::nullopt;
  };

  if (k == "n_employers") return set_int(cfg.n_employers);
  if (k == "n_compliant") return set_int(cfg.n_compliant);
  if (k == "new_per_step") return set_int(cfg.new_per_step);
  if (k == "spots") return set_int(cfg.spots);
  if (k == "max_wait") return set_int(cfg.max_wait);
  if (k == "burn_in_steps") return set_int(cfg.burn_in_steps);
  if (k == "measure_steps") return set_int(cfg.measure_steps);
  if (k == "trials") return set_int(cfg.trials);
  if (k == "fraction_b") return set_real(cfg.fraction_b);
  if (k == "mean_a") return set_real(cfg.mean_a);
  if (k == "mean_b") return set_real(cfg.mean_b);
  if (k == "score_variance") return set_real(cfg.score_variance);
  if (k == "static_pref") return set_real(cfg.static_pref);
  if (k == "stepsize") return set_real(cfg.stepsize);
  if (k == "seed") {
    auto v = detail::parse_number<std::uint64_t>(value);
    if (!v) return bad();
    cfg.seed = *v;
    return std::nullopt;
  }
  if (k == "compliant_policy") {
    auto p = parse_policy(value);
    if (!p) return bad();
    cfg.compliant_policy = *p;
    return std::nullopt;
  }
  if (k == "strategy") {
    auto s = parse_strategy(value);
    if (!s) return bad();
    cfg.strategy = *s;
    return std::nullopt;
  }
  return "unknown key: " + k;
}

/// Incrementally assembled config: file entries, then overrides, then
/// strategy-dependent protocol defaults for keys nobody set.
class ConfigBuilder {
 public:
  explicit ConfigBuilder(MarketConfig base = MarketConfig::defaults()) : cfg_(base) {}

  ConfigBuilder& apply(std::string_view key, std::string_view value) {
    if (auto err = set_config_field(cfg_, detail::trim(key), detail::trim(value))) {
      errors_.push_back(*err);
    } else {
      explicit_.insert(std::string(detail::trim(key)));
    }
    return *this;
  }

  /// `key=value` as given to --set.
  ConfigBuilder& apply_assignment(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
      errors_.push_back("override must be key=value: '" + std::string(assignment) + "'");
      return *this;
    }
    return apply(assignment.substr(0, eq), assignment.substr(eq + 1));
  }

  /// One `key = value` per line; `#` starts a comment.
  ConfigBuilder& apply_text(std::string_view text, std::string_view origin = "<text>") {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string_view view(line);
      if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
      view = detail::trim(view);
      if (view.empty()) continue;
      const auto eq = view.find('=');
      if (eq == std::string_view::npos) {
        errors_.push_back(std::string(origin) + ":" + std::to_string(lineno) +
                          ": expected key = value");
        continue;
      }
      apply(view.substr(0, eq), view.substr(eq + 1));
    }
    return *this;
  }

  ConfigBuilder& apply_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file: " + path});
    std::stringstream buf;
    buf << in.rdbuf();
    return apply_text(buf.str(), path);
  }

  [[nodiscard]] bool is_set(const std::string& key) const { return explicit_.count(key) > 0; }

  /// Resolved and validated config; throws ConfigError listing every problem.
  [[nodiscard]] MarketConfig build() const {
    MarketConfig cfg = cfg_;
    if (!is_set("burn_in_steps")) {
      cfg.burn_in_steps = is_set("measure_steps") ? cfg.measure_steps : default_burn_in(cfg.strategy);
    }
    if (!is_set("measure_steps")) cfg.measure_steps = cfg.burn_in_steps;
    std::vector<std::string> problems = errors_;
    for (auto& v : validate_config(cfg)) problems.push_back(std::move(v));
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return cfg;
  }

 private:
  MarketConfig cfg_;
  std::set<std::string> explicit_;
  std::vector<std::string> errors_;
};

/// Canonical `key = value` text, one line per field in config_keys() order.
/// Parsing it back yields an equal config.
inline std::string to_config_text(const MarketConfig& cfg) {
  std::ostringstream out;
  out << "n_employers = " << cfg.n_employers << '\n'
      << "n_compliant = " << cfg.n_compliant << '\n'
      << "compliant_policy = " << to_string(cfg.compliant_policy) << '\n'
      << "strategy = " << to_string(cfg.strategy) << '\n'
      << "fraction_b = " << detail::format_double(cfg.fraction_b) << '\n'
      << "mean_a = " << detail::format_double(cfg.mean_a) << '\n'
      << "mean_b = " << detail::format_double(cfg.mean_b) << '\n'
      << "score_variance = " << detail::format_double(cfg.score_variance) << '\n'
      << "new_per_step = " << cfg.new_per_step << '\n'
      << "spots = " << cfg.spots << '\n'
      << "max_wait = " << cfg.max_wait << '\n'
      << "static_pref = " << detail::format_double(cfg.static_pref) << '\n'
      << "stepsize = " << detail::format_double(cfg.stepsize) << '\n'
      << "burn_in_steps = " << cfg.burn_in_steps << '\n'
      << "measure_steps = " << cfg.measure_steps << '\n'
      << "trials = " << cfg.trials << '\n'
      << "seed = " << cfg.seed << '\n';
  return out.str();
}

/// FNV-1a over the canonical text, as 16 hex digits.
inline std::string fingerprint(std::string_view canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string fingerprint(const MarketConfig& cfg) { return fingerprint(to_config_text(cfg)); }

}  // namespace parity_market
