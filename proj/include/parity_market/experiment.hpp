#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "parity_market/config_io.hpp"
#include "parity_market/engine.hpp"
#include "parity_market/metrics.hpp"
#include "parity_market/model.hpp"

namespace parity_market {

inline constexpr std::string_view kVersion = "0.1.0";

struct SweepSpec {
  std::string name = "sweep";
  MarketConfig base;          // n_compliant is ignored
  std::vector<int> levels;    // compliance levels, sorted and distinct
  int trials = 10;

  /// Levels 0..n_employers and the config's trial count.
  static SweepSpec full(std::string name, const MarketConfig& base) {
    SweepSpec s;
    s.name = std::move(name);
    s.base = base;
    s.trials = base.trials;
    for (int k = 0; k <= base.n_employers; ++k) s.levels.push_back(k);
    return s;
  }

  [[nodiscard]] MarketConfig config_at(int level) const {
    MarketConfig cfg = base;
    cfg.n_compliant = level;
    cfg.trials = trials;
    return cfg;
  }
};

inline std::vector<std::string> validate_sweep(const SweepSpec& spec) {
  std::vector<std::string> errors = validate_config(spec.config_at(0));
  if (spec.levels.empty()) errors.emplace_back("compliance levels must not be empty");
  if (!std::is_sorted(spec.levels.begin(), spec.levels.end()) ||
      std::adjacent_find(spec.levels.begin(), spec.levels.end()) != spec.levels.end())
    errors.emplace_back("compliance levels must be sorted and distinct");
  for (int k : spec.levels)
    if (k < 0 || k > spec.base.n_employers) {
      errors.push_back("compliance level out of range: " + std::to_string(k));
      break;
    }
  if (std::find(spec.levels.begin(), spec.levels.end(), 0) == spec.levels.end())
    errors.emplace_back("compliance levels must include 0 (baseline)");
  return errors;
}

/// Identifies everything that influences a (level, trial) result; rows from
/// an earlier run are reusable only when this matches.
inline std::string stream_fingerprint(const SweepSpec& spec) {
  MarketConfig cfg = spec.base;
  cfg.n_compliant = 0;
  cfg.trials = 0;
  return fingerprint(to_config_text(cfg));
}

/// Covers the whole resolved spec, levels and trial count included.
inline std::string sweep_fingerprint(const SweepSpec& spec) {
  std::string text = "name = " + spec.name + "\n" + to_config_text(spec.config_at(0)) + "levels =";
  for (int k : spec.levels) text += " " + std::to_string(k);
  text += "\n";
  return fingerprint(text);
}

struct SweepRow {
  int n_compliant = 0;
  int trial = 0;
  Missing di;
  Missing scaled_benefit;
  std::array<Missing, 2> b_share_hires{};  // by sector
  std::array<double, 2> p_compliant{};     // window mean, by group
  RateGrid rate{};                         // [group][sector]
  double pool_size_mean = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

/// CSV column order; stable across versions.
inline const std::array<std::string_view, 14>& csv_columns() {
  static const std::array<std::string_view, 14> cols = {
      "n_compliant",      "trial",           "di",
      "scaled_benefit",   "b_share_hires_compliant", "b_share_hires_noncompliant",
      "p_compliant_a",    "p_compliant_b",   "rate_a_compliant",
      "rate_a_noncompliant", "rate_b_compliant", "rate_b_noncompliant",
      "pool_size_mean",   "seed"};
  return cols;
}

inline constexpr std::size_t kNumericColumns = 11;  // di .. pool_size_mean

/// The numeric CSV columns of a row, in csv_columns() order starting at di.
inline std::array<Missing, kNumericColumns> numeric_values(const SweepRow& r) {
  using S = Sector;
  return {r.di,
          r.scaled_benefit,
          r.b_share_hires[index(S::Compliant)],
          r.b_share_hires[index(S::NonCompliant)],
          r.p_compliant[index(Group::A)],
          r.p_compliant[index(Group::B)],
          r.rate[index(Group::A)][index(S::Compliant)],
          r.rate[index(Group::A)][index(S::NonCompliant)],
          r.rate[index(Group::B)][index(S::Compliant)],
          r.rate[index(Group::B)][index(S::NonCompliant)],
          r.pool_size_mean};
}

inline SweepRow make_row(const MarketConfig& cfg, const TrialResult& trial) {
  const WindowSummary s = summarize(trial);
  SweepRow row;
  row.n_compliant = cfg.n_compliant;
  row.trial = trial.trial_index;
  row.di = s.di;
  row.b_share_hires = s.b_share_of_hires;
  row.p_compliant = s.probabilities.mean_p_compliant;
  row.rate = s.acceptance_rate;
  row.pool_size_mean = s.pool_size_mean;
  row.seed = cfg.seed;
  return row;
}

/// Mean DI over the level-0 rows, or missing when none is defined.
inline Missing baseline_di(const std::vector<SweepRow>& rows) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : rows)
    if (r.n_compliant == 0 && r.di) {
      sum += *r.di;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / n;
}

/// Fills scaled_benefit on every row relative to the level-0 baseline.
inline void apply_baseline(std::vector<SweepRow>& rows) {
  const Missing base = baseline_di(rows);
  const bool usable = base && *base < 1.0;
  for (auto& r : rows) {
    r.scaled_benefit.reset();
    if (!usable || !r.di) continue;
    r.scaled_benefit = r.n_compliant == 0 ? 0.0 : scaled_benefit(*r.di, *base);
  }
}

struct SweepOptions {
  unsigned jobs = 1;
  std::vector<SweepRow> reuse;  // previously computed rows; matched by (level, trial)
};

/// Every (level, trial) of the spec, sorted by (level, trial). Results do not
/// depend on `jobs`.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SweepOptions& options = {}) {
  if (auto errors = validate_sweep(spec); !errors.empty()) throw ConfigError(std::move(errors));

  std::map<std::pair<int, int>, SweepRow> known;
  for (const auto& r : options.reuse) known.emplace(std::pair{r.n_compliant, r.trial}, r);

  std::vector<SweepRow> rows;
  std::vector<std::size_t> pending;
  for (int k : spec.levels)
    for (int t = 0; t < spec.trials; ++t) {
      auto it = known.find({k, t});
      if (it != known.end()) {
        rows.push_back(it->second);
      } else {
        SweepRow placeholder;
        placeholder.n_compliant = k;
        placeholder.trial = t;
        rows.push_back(placeholder);
        pending.push_back(rows.size() - 1);
      }
    }

  std::atomic<std::size_t> cursor{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto worker = [&] {
    for (std::size_t i = cursor++; i < pending.size(); i = cursor++) {
      try {
        SweepRow& slot = rows[pending[i]];
        const MarketConfig cfg = spec.config_at(slot.n_compliant);
        slot = make_row(cfg, run_trial(cfg, slot.trial));
      } catch (...) {
        std::lock_guard lock(failure_lock);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(pending.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  apply_baseline(rows);
  return rows;
}

// ---------------------------------------------------------------------------
// Serialization

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string format_missing(const Missing& v) { return v ? format_double(*v) : std::string(); }

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace detail

inline std::string to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : rows) {
    out << r.n_compliant << ',' << r.trial;
    for (const auto& v : numeric_values(r)) out << ',' << detail::format_missing(v);
    out << ',' << r.seed << '\n';
  }
  return out.str();
}

/// Parses CSV text in the documented schema. Columns are located by name, so
/// extra columns are ignored and missing ones raise SchemaError.
inline std::vector<SweepRow> parse_csv(const std::string& text, const std::string& origin = "<csv>") {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(origin + ": empty file");
  const auto header = detail::split_csv_line(line);
  std::array<std::size_t, 14> pos{};
  const auto& cols = csv_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), cols[c]);
    if (it == header.end()) throw SchemaError("missing column: " + std::string(cols[c]));
    pos[c] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<SweepRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv_line(line);
    auto where = [&](std::size_t c) {
      return origin + ":" + std::to_string(lineno) + ": bad value in column " + std::string(cols[c]);
    };
    auto field = [&](std::size_t c) -> const std::string& {
      if (pos[c] >= f.size()) throw SchemaError(where(c));
      return f[pos[c]];
    };
    auto integer = [&](std::size_t c) {
      auto v = detail::parse_number<int>(field(c));
      if (!v) throw SchemaError(where(c));
      return *v;
    };
    auto real = [&](std::size_t c) -> Missing {
      const auto& s = field(c);
      if (s.empty()) return std::nullopt;
      auto v = detail::parse_number<double>(s);
      if (!v) throw SchemaError(where(c));
      return *v;
    };

    SweepRow r;
    r.n_compliant = integer(0);
    r.trial = integer(1);
    r.di = real(2);
    r.scaled_benefit = real(3);
    r.b_share_hires = {real(4), real(5)};
    r.p_compliant = {real(6).value_or(0.0), real(7).value_or(0.0)};
    r.rate[0] = {real(8), real(9)};
    r.rate[1] = {real(10), real(11)};
    r.pool_size_mean = real(12).value_or(0.0);
    auto seed = detail::parse_number<std::uint64_t>(field(13));
    if (!seed) throw SchemaError(where(13));
    r.seed = *seed;
    rows.push_back(r);
  }
  return rows;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::vector<SweepRow> read_results(const std::filesystem::path& csv_path) {
  return parse_csv(read_text_file(csv_path), csv_path.string());
}

inline std::filesystem::path csv_path_for(const std::filesystem::path& dir, const std::string& name) {
  return dir / (name + "_sweep.csv");
}

inline std::filesystem::path meta_path_for(const std::filesystem::path& csv_path) {
  std::string p = csv_path.string();
  if (p.size() >= 4 && p.compare(p.size() - 4, 4, ".csv") == 0) p.resize(p.size() - 4);
  return p + ".meta.json";
}

inline nlohmann::json config_json(const MarketConfig& cfg) {
  return {{"n_employers", cfg.n_employers},
          {"n_compliant", cfg.n_compliant},
          {"compliant_policy", std::string(to_string(cfg.compliant_policy))},
          {"strategy", std::string(to_string(cfg.strategy))},
          {"fraction_b", cfg.fraction_b},
          {"mean_a", cfg.mean_a},
          {"mean_b", cfg.mean_b},
          {"score_variance", cfg.score_variance},
          {"new_per_step", cfg.new_per_step},
          {"spots", cfg.spots},
          {"max_wait", cfg.max_wait},
          {"static_pref", cfg.static_pref},
          {"stepsize", cfg.stepsize},
          {"burn_in_steps", cfg.burn_in_steps},
          {"measure_steps", cfg.measure_steps},
          {"trials", cfg.trials},
          {"seed", cfg.seed}};
}

inline nlohmann::json sweep_metadata(const SweepSpec& spec, double elapsed_seconds) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::tm utc{};
  gmtime_r(&now, &utc);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);

  nlohmann::json columns = nlohmann::json::array();
  for (auto c : csv_columns()) columns.push_back(std::string(c));
  return {{"scenario", spec.name},
          {"version", std::string(kVersion)},
          {"fingerprint", sweep_fingerprint(spec)},
          {"stream_fingerprint", stream_fingerprint(spec)},
          {"config", config_json(spec.config_at(0))},
          {"levels", spec.levels},
          {"trials", spec.trials},
          {"generator", std::string(kGeneratorAlgorithm)},
          {"hire_probability_estimator", "window hires / window entrants per group"},
          {"parity_exhaustion_rule", "slot falls back to the other group when the drawn group is exhausted"},
          {"missing_values", "empty CSV field"},
          {"columns", columns},
          {"created_utc", stamp},
          {"elapsed_seconds", elapsed_seconds}};
}

/// Writes `csv_path` and the sibling `.meta.json`.
inline void write_results(const std::vector<SweepRow>& rows, const SweepSpec& spec,
                          const std::filesystem::path& csv_path, double elapsed_seconds = 0.0) {
  if (rows.empty()) throw std::invalid_argument("write_results: no rows");
  if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
  write_text_file(csv_path, to_csv(rows));
  write_text_file(meta_path_for(csv_path), sweep_metadata(spec, elapsed_seconds).dump(2) + "\n");
}

/// Rows of an earlier run at `csv_path` whose stream fingerprint matches `spec`;
/// empty when there is nothing reusable.
inline std::vector<SweepRow> load_resumable(const SweepSpec& spec, const std::filesystem::path& csv_path) {
  const auto meta_path = meta_path_for(csv_path);
  if (!std::filesystem::exists(csv_path) || !std::filesystem::exists(meta_path)) return {};
  try {
    const auto meta = nlohmann::json::parse(read_text_file(meta_path));
    if (meta.value("stream_fingerprint", std::string()) != stream_fingerprint(spec)) return {};
    return read_results(csv_path);
  } catch (const std::exception&) {
    return {};
  }
}

// ---------------------------------------------------------------------------
// Aggregation

struct CellStats {
  Missing mean;
  Missing stddev;  // sample standard deviation; 0 for a single value
  int count = 0;
};

struct LevelAggregate {
  int n_compliant = 0;
  int rows = 0;
  std::array<CellStats, kNumericColumns> cells{};  // numeric columns in CSV order
};

inline CellStats describe(const std::vector<double>& values) {
  CellStats s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  s.mean = mean;
  s.stddev = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  return s;
}

/// Per-level statistics of every numeric column, missing values excluded.
inline std::vector<LevelAggregate> aggregate(const std::vector<SweepRow>& rows) {
  std::map<int, std::vector<const SweepRow*>> by_level;
  for (const auto& r : rows) by_level[r.n_compliant].push_back(&r);
  std::vector<LevelAggregate> out;
  for (const auto& [level, members] : by_level) {
    LevelAggregate agg;
    agg.n_compliant = level;
    agg.rows = static_cast<int>(members.size());
    std::array<std::vector<double>, kNumericColumns> values;
    for (const auto* r : members) {
      const auto v = numeric_values(*r);
      for (std::size_t c = 0; c < kNumericColumns; ++c)
        if (v[c]) values[c].push_back(*v[c]);
    }
    for (std::size_t c = 0; c < kNumericColumns; ++c) agg.cells[c] = describe(values[c]);
    out.push_back(agg);
  }
  return out;
}

/// Column name of numeric cell `c` of a LevelAggregate.
inline std::string_view numeric_column(std::size_t c) { return csv_columns()[c + 2]; }

inline const LevelAggregate* find_level(const std::vector<LevelAggregate>& aggs, int level) {
  for (const auto& a : aggs)
    if (a.n_compliant == level) return &a;
  return nullptr;
}

inline std::size_t numeric_index(std::string_view column) {
  for (std::size_t c = 0; c < kNumericColumns; ++c)
    if (numeric_column(c) == column) return c;
  throw std::out_of_range("not a numeric column: " + std::string(column));
}

}  // namespace parity_market
