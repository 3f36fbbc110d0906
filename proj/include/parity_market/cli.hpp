#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "parity_market/config_io.hpp"
#include "parity_market/experiment.hpp"
#include "parity_market/metrics.hpp"
#include "parity_market/presets.hpp"
#include "parity_market/report.hpp"

namespace parity_market::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;
inline constexpr const char* kSeedEnv = "PARITY_MARKET_SEED";

/// Options shared by the commands that resolve a scenario.
struct ScenarioOptions {
  std::string config;  // file path or preset name
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string levels;
  unsigned jobs = 1;
  std::string out_dir = ".";
  std::string format = "text";
  double scale = 1.0;
};

struct ResolvedScenario {
  std::string name;
  MarketConfig config;
};

/// Preset or file, then PARITY_MARKET_SEED, then file keys, then --set, then
/// --seed / --trials, then --scale. Throws ConfigError.
inline ResolvedScenario resolve_scenario(const ScenarioOptions& opt) {
  ResolvedScenario out;
  MarketConfig base = MarketConfig::defaults();
  std::optional<std::string> file;
  if (opt.config.empty()) {
    out.name = "default";
  } else if (std::filesystem::exists(opt.config)) {
    file = opt.config;
    out.name = std::filesystem::path(opt.config).stem().string();
  } else if (auto preset = find_preset(opt.config)) {
    base = preset->config;
    out.name = preset->name;
  } else {
    throw ConfigError({"cannot open config file: " + opt.config});
  }

  ConfigBuilder builder(base);
  if (const char* env = std::getenv(kSeedEnv); env && *env) builder.apply("seed", env);
  if (file) builder.apply_file(*file);
  for (const auto& s : opt.sets) builder.apply_assignment(s);
  if (opt.seed) builder.apply("seed", std::to_string(*opt.seed));
  if (opt.trials) builder.apply("trials", std::to_string(*opt.trials));
  out.config = builder.build();

  if (opt.scale != 1.0) {
    if (!(opt.scale > 0.0)) throw ConfigError({"--scale must be positive"});
    out.config = scale_market(out.config, opt.scale);
    if (auto errors = validate_config(out.config); !errors.empty()) throw ConfigError(std::move(errors));
  }
  return out;
}

inline std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> levels;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto v = detail::parse_number<int>(detail::trim(item));
    if (!v) throw ConfigError({"invalid compliance level: '" + item + "'"});
    levels.push_back(*v);
  }
  return levels;
}

inline SweepSpec make_sweep_spec(const ResolvedScenario& scenario, const ScenarioOptions& opt) {
  SweepSpec spec = SweepSpec::full(scenario.name, scenario.config);
  if (!opt.levels.empty()) spec.levels = parse_levels(opt.levels);
  if (auto errors = validate_sweep(spec); !errors.empty()) throw ConfigError(std::move(errors));
  return spec;
}

namespace detail {

inline nlohmann::json missing_json(const Missing& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

inline std::string cell(const Missing& v, int precision = 4) {
  if (!v) return "-";
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << *v;
  return s.str();
}

inline nlohmann::json summary_json(const WindowSummary& s, const TrialResult& t) {
  using S = Sector;
  auto by_sector = [](const std::array<Missing, 2>& v) {
    return nlohmann::json{{"compliant", missing_json(v[index(S::Compliant)])},
                          {"noncompliant", missing_json(v[index(S::NonCompliant)])}};
  };
  auto counts = [&](const std::array<std::array<std::int64_t, 2>, 2>& c) {
    return nlohmann::json{{"a_compliant", c[0][0]}, {"a_noncompliant", c[0][1]},
                          {"b_compliant", c[1][0]}, {"b_noncompliant", c[1][1]}};
  };
  return {{"trial", t.trial_index},
          {"rounds_executed", t.rounds_executed},
          {"measured_rounds", t.window.size()},
          {"di", missing_json(s.di)},
          {"b_share_hires", by_sector(s.b_share_of_hires)},
          {"hire_rate",
           {{"a_compliant", missing_json(s.acceptance_rate[0][0])},
            {"a_noncompliant", missing_json(s.acceptance_rate[0][1])},
            {"b_compliant", missing_json(s.acceptance_rate[1][0])},
            {"b_noncompliant", missing_json(s.acceptance_rate[1][1])}}},
          {"rate_gap", {{"a", missing_json(s.rate_gap[0])}, {"b", missing_json(s.rate_gap[1])}}},
          {"p_compliant",
           {{"a", s.probabilities.mean_p_compliant[0]}, {"b", s.probabilities.mean_p_compliant[1]}}},
          {"p_compliant_trend", {{"a", s.p_trend[0]}, {"b", s.p_trend[1]}}},
          {"no_preference", s.probabilities.no_preference},
          {"final_logits", {{"a", t.final_state.logit_a}, {"b", t.final_state.logit_b}}},
          {"applications", counts(s.totals.applications)},
          {"hires", counts(s.totals.hires)},
          {"entrants", {{"a", s.entrants[0]}, {"b", s.entrants[1]}}},
          {"pool_size_mean", s.pool_size_mean}};
}

inline void print_summary_table(std::ostream& out, const std::vector<std::pair<TrialResult, WindowSummary>>& runs) {
  out << std::left << std::setw(6) << "trial" << std::right << std::setw(9) << "di" << std::setw(10)
      << "B%comp" << std::setw(10) << "B%gen" << std::setw(9) << "p_a" << std::setw(9) << "p_b"
      << std::setw(10) << "rate_Ac" << std::setw(10) << "rate_An" << std::setw(10) << "rate_Bc"
      << std::setw(10) << "rate_Bn" << std::setw(9) << "pool" << '\n';
  for (const auto& [t, s] : runs) {
    out << std::left << std::setw(6) << t.trial_index << std::right << std::setw(9) << cell(s.di)
        << std::setw(10) << cell(s.b_share_of_hires[0]) << std::setw(10) << cell(s.b_share_of_hires[1])
        << std::setw(9) << cell(s.probabilities.mean_p_compliant[0]) << std::setw(9)
        << cell(s.probabilities.mean_p_compliant[1]) << std::setw(10) << cell(s.acceptance_rate[0][0])
        << std::setw(10) << cell(s.acceptance_rate[0][1]) << std::setw(10) << cell(s.acceptance_rate[1][0])
        << std::setw(10) << cell(s.acceptance_rate[1][1]) << std::setw(9) << cell(s.pool_size_mean, 0)
        << '\n';
  }
}

inline void print_aggregate_table(std::ostream& out, const std::vector<LevelAggregate>& aggs) {
  const auto c = [](std::string_view name) { return numeric_index(name); };
  out << std::setw(6) << "level" << std::setw(6) << "rows" << std::setw(9) << "di" << std::setw(10)
      << "benefit" << std::setw(9) << "sd" << std::setw(9) << "p_a" << std::setw(9) << "p_b"
      << std::setw(10) << "B%comp" << std::setw(10) << "B%gen" << '\n';
  for (const auto& a : aggs) {
    out << std::setw(6) << a.n_compliant << std::setw(6) << a.rows << std::setw(9)
        << cell(a.cells[c("di")].mean) << std::setw(10) << cell(a.cells[c("scaled_benefit")].mean)
        << std::setw(9) << cell(a.cells[c("scaled_benefit")].stddev) << std::setw(9)
        << cell(a.cells[c("p_compliant_a")].mean) << std::setw(9) << cell(a.cells[c("p_compliant_b")].mean)
        << std::setw(10) << cell(a.cells[c("b_share_hires_compliant")].mean) << std::setw(10)
        << cell(a.cells[c("b_share_hires_noncompliant")].mean) << '\n';
  }
}

inline nlohmann::json aggregate_json(const std::vector<LevelAggregate>& aggs) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& a : aggs) {
    nlohmann::json cells;
    for (std::size_t i = 0; i < kNumericColumns; ++i)
      cells[std::string(numeric_column(i))] = {{"mean", missing_json(a.cells[i].mean)},
                                               {"stddev", missing_json(a.cells[i].stddev)},
                                               {"count", a.cells[i].count}};
    levels.push_back({{"n_compliant", a.n_compliant}, {"rows", a.rows}, {"columns", cells}});
  }
  return levels;
}

struct SweepOutcome {
  std::vector<SweepRow> rows;
  std::filesystem::path csv;
  std::size_t reused = 0;
};

inline SweepOutcome execute_sweep(const SweepSpec& spec, const std::filesystem::path& out_dir, unsigned jobs) {
  SweepOutcome outcome;
  outcome.csv = csv_path_for(out_dir, spec.name);
  SweepOptions options;
  options.jobs = jobs;
  options.reuse = load_resumable(spec, outcome.csv);
  const auto t0 = std::chrono::steady_clock::now();
  outcome.rows = run_sweep(spec, options);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& r : outcome.rows)
    for (const auto& old : options.reuse)
      if (old.n_compliant == r.n_compliant && old.trial == r.trial) {
        ++outcome.reused;
        break;
      }
  write_results(outcome.rows, spec, outcome.csv, elapsed);
  return outcome;
}

}  // namespace detail

inline int cmd_run(const ScenarioOptions& opt, std::ostream& out) {
  const ResolvedScenario sc = resolve_scenario(opt);
  const MarketConfig& cfg = sc.config;
  std::vector<std::pair<TrialResult, WindowSummary>> runs(static_cast<std::size_t>(cfg.trials));
  {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int t = next++; t < cfg.trials; t = next++) {
        TrialResult r = run_trial(cfg, t);
        WindowSummary s = summarize(r);
        for (auto& rec : r.window) rec.outcomes.clear();
        runs[static_cast<std::size_t>(t)] = {std::move(r), s};
      }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(cfg.trials)));
    std::vector<std::jthread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
  }

  if (opt.format == "json") {
    nlohmann::json trials = nlohmann::json::array();
    for (const auto& [t, s] : runs) trials.push_back(detail::summary_json(s, t));
    out << nlohmann::json{{"scenario", sc.name},
                          {"fingerprint", fingerprint(cfg)},
                          {"config", config_json(cfg)},
                          {"trials", trials}}
               .dump(2)
        << '\n';
  } else {
    out << "scenario: " << sc.name << '\n' << "fingerprint: " << fingerprint(cfg) << '\n';
    out << "n_compliant " << cfg.n_compliant << " of " << cfg.n_employers << ", "
        << to_string(cfg.compliant_policy) << ", " << to_string(cfg.strategy) << ", fraction_b "
        << cfg.fraction_b << ", " << cfg.burn_in_steps << "+" << cfg.measure_steps << " rounds\n";
    detail::print_summary_table(out, runs);
  }
  return kExitOk;
}

inline int cmd_sweep(const ScenarioOptions& opt, std::ostream& out) {
  const ResolvedScenario sc = resolve_scenario(opt);
  const SweepSpec spec = make_sweep_spec(sc, opt);
  const auto outcome = detail::execute_sweep(spec, opt.out_dir, opt.jobs);
  const auto aggs = aggregate(outcome.rows);
  if (opt.format == "json") {
    out << nlohmann::json{{"scenario", spec.name},
                          {"fingerprint", sweep_fingerprint(spec)},
                          {"csv", outcome.csv.string()},
                          {"rows", outcome.rows.size()},
                          {"reused_rows", outcome.reused},
                          {"levels", detail::aggregate_json(aggs)}}
               .dump(2)
        << '\n';
  } else {
    out << "scenario: " << spec.name << '\n'
        << "fingerprint: " << sweep_fingerprint(spec) << '\n'
        << "wrote " << outcome.rows.size() << " rows to " << outcome.csv.string() << " (reused "
        << outcome.reused << ")\n";
    detail::print_aggregate_table(out, aggs);
  }
  return kExitOk;
}

inline int cmd_report(const std::vector<std::string>& csv_paths, const std::string& out_dir, std::ostream& out) {
  std::vector<ReportSeries> series;
  for (const auto& p : csv_paths) series.push_back(load_series(p));
  for (const auto& path : write_charts(series, out_dir)) out << "wrote " << path.string() << '\n';
  return kExitOk;
}

inline int cmd_reproduce(const ScenarioOptions& opt, std::ostream& out) {
  const auto presets = scenario_presets();
  std::map<std::string, std::vector<ReportSeries>> panels;  // "<strategy>-<mix>" -> series
  for (const auto& preset : presets) {
    ScenarioOptions o = opt;
    o.config = preset.name;
    const ResolvedScenario sc = resolve_scenario(o);
    const SweepSpec spec = make_sweep_spec(sc, o);
    const auto outcome = detail::execute_sweep(spec, opt.out_dir, opt.jobs);
    out << preset.name << ": " << outcome.rows.size() << " rows -> " << outcome.csv.string()
        << " (fingerprint " << sweep_fingerprint(spec) << ", reused " << outcome.reused << ")\n";
    const auto dash = preset.name.find('-');
    ReportSeries s;
    s.label = preset.name.substr(0, dash);
    s.rows = outcome.rows;
    s.n_employers = sc.config.n_employers;
    s.fraction_b = sc.config.fraction_b;
    panels[preset.name.substr(dash + 1)].push_back(std::move(s));
  }
  for (const auto& [panel, series] : panels)
    for (const auto& path : write_charts(series, opt.out_dir, panel + "_"))
      out << "wrote " << path.string() << '\n';
  return kExitOk;
}

inline int cmd_presets(std::ostream& out) {
  for (const auto& p : scenario_presets())
    out << std::left << std::setw(20) << p.name << p.description << " (fingerprint "
        << fingerprint(p.config) << ")\n";
  return kExitOk;
}

/// Entry point. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Partial-compliance hiring market simulator", "parity_market"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every command");

  ScenarioOptions opt;
  std::vector<std::string> csv_paths;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;

  auto add_scenario = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config, "Config file (key = value lines) or preset name");
    cmd->add_option("--set", opt.sets, "Override one config key, K=V (repeatable)")->take_all();
    cmd->add_option("--seed", seed, "Base seed (default from " + std::string(kSeedEnv) + ")");
    cmd->add_option("--trials", trials, "Trials per compliance level")->check(CLI::PositiveNumber);
    cmd->add_option("--jobs", opt.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };
  auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  };
  auto add_sweep = [&](CLI::App* cmd) {
    cmd->add_option("--levels", opt.levels, "Comma-separated compliance levels (default 0..n_employers)");
    cmd->add_option("--out", opt.out_dir, "Output directory");
    cmd->add_option("--scale", opt.scale, "Multiply employers and arrivals by this factor");
  };

  auto* run_cmd = app.add_subcommand("run", "Run the configured trials at one compliance level");
  add_scenario(run_cmd);
  add_format(run_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep compliance levels, write CSV and metadata");
  add_scenario(sweep_cmd);
  add_format(sweep_cmd);
  add_sweep(sweep_cmd);

  auto* report_cmd = app.add_subcommand("report", "Render SVG charts from sweep CSVs");
  report_cmd->add_option("csv", csv_paths, "Sweep CSV files")->required();
  report_cmd->add_option("--out", opt.out_dir, "Output directory");

  auto* reproduce_cmd = app.add_subcommand("reproduce", "Sweep every preset and render all charts");
  add_scenario(reproduce_cmd);
  add_sweep(reproduce_cmd);
  reproduce_cmd->get_option("--config")->description("Ignored; every preset is run");

  auto* presets_cmd = app.add_subcommand("presets", "List scenario presets");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  opt.seed = seed;
  opt.trials = trials;

  try {
    if (*run_cmd) return cmd_run(opt, out);
    if (*sweep_cmd) return cmd_sweep(opt, out);
    if (*report_cmd) return cmd_report(csv_paths, opt.out_dir, out);
    if (*reproduce_cmd) return cmd_reproduce(opt, out);
    if (*presets_cmd) return cmd_presets(out);
  } catch (const ConfigError& e) {
    for (const auto& p : e.problems()) err << "config error: " << p << '\n';
    return kExitUsage;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace parity_market::cli
