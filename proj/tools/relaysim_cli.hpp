#pragma once

// Command-line front end. `run_cli` is the whole program minus `main`, so
// tests can drive it in-process.
//
// Exit codes: 0 success, 1 lemma validation failed, 2 usage or config error,
// 3 numeric failure.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "relaysim/lemma_validation.hpp"
#include "relaysim/montecarlo.hpp"

namespace relaysim::cli {

inline constexpr const char* kVersion = "relaysim 0.1.0";
inline constexpr const char* kRateUnits = "bits/channel-use (half-duplex factor included)";

enum ExitCode : int { kOk = 0, kValidationFailed = 1, kUsage = 2, kNumeric = 3 };

struct RunManifest {
  nlohmann::json config;
  std::string version = kVersion;
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
  std::map<std::string, std::string> outputs;
  nlohmann::json summary;  // command specific (slopes, probe results)

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

inline void to_json(nlohmann::json& j, const RunManifest& m) {
  j = nlohmann::json{{"config", m.config},   {"version", m.version},   {"seed", m.seed},
                     {"started", m.started}, {"finished", m.finished}, {"outputs", m.outputs},
                     {"summary", m.summary}};
}

inline void from_json(const nlohmann::json& j, RunManifest& m) {
  j.at("config").get_to(m.config);
  j.at("version").get_to(m.version);
  j.at("seed").get_to(m.seed);
  j.at("started").get_to(m.started);
  j.at("finished").get_to(m.finished);
  j.at("outputs").get_to(m.outputs);
  m.summary = j.value("summary", nlohmann::json());
}

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string num(double x) { return fmt::format("{:.12g}", x); }
inline std::string opt_num(const std::optional<double>& x) { return x ? num(*x) : std::string(); }

// Settings shared by every subcommand.
struct CommonOptions {
  int antennas = 2;
  int relay_antennas = 2;
  std::vector<double> snr_db{10.0};
  std::size_t trials = 2000;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out_dir = ".";
  std::string config_path;
  std::string threshold_rule = "scaled";
  double threshold_scale = 4.0;
};

inline ThresholdSchedule make_threshold(const CommonOptions& c) {
  if (c.threshold_rule == "literal") return ThresholdSchedule::literal();
  return {ThresholdSchedule::Kind::kRelayPowerScaled, c.threshold_scale};
}

inline std::string describe_threshold(const ThresholdSchedule& t) {
  if (t.kind == ThresholdSchedule::Kind::kLiteral) return "beta=1/ln(K)";
  return fmt::format("beta={}*P_r/ln(K)", num(t.scale));
}

// Renders a JSON config value the way it would be typed on the command line.
inline std::string config_value_to_arg(const nlohmann::json& v) {
  if (v.is_array()) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ',';
      out += config_value_to_arg(v[i]);
    }
    return out;
  }
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

/// Appends `--key value` for every config-file entry whose flag is absent
/// from `args`, so explicit flags win over the file.
inline std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i] == "--config") path = args[i + 1];
  for (const auto& a : args)
    if (a.starts_with("--config=")) path = a.substr(9);
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw ContractViolation("cannot open config file: " + path);
  nlohmann::json cfg;
  try {
    in >> cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!cfg.is_object()) throw ContractViolation("config file must hold a flat JSON object");

  std::set<std::string> given;
  for (const auto& a : args)
    if (a.starts_with("--")) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));

  std::vector<std::string> out = args;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config" || given.contains(key)) continue;
    if (value.is_object()) throw ContractViolation("config entry '" + key + "' must not be an object");
    out.push_back("--" + key);
    out.push_back(config_value_to_arg(value));
  }
  return out;
}

inline void add_common(CLI::App& app, CommonOptions& c) {
  app.add_option("--M", c.antennas, "transmitter/receiver antennas")->check(CLI::PositiveNumber);
  app.add_option("--N", c.relay_antennas, "antennas per relay")->check(CLI::PositiveNumber);
  app.add_option("--snr-db", c.snr_db, "SNR grid in dB (P_s = P_r = 10^(dB/10))")->delimiter(',');
  app.add_option("--trials", c.trials, "Monte Carlo trials per point")->check(CLI::Range(2, 100000000));
  app.add_option("--seed", c.seed, "master seed (falls back to $RELAYSIM_SEED)");
  app.add_option("--workers", c.workers, "worker threads; results do not depend on it")->check(CLI::Range(1, 1024));
  app.add_option("--out-dir", c.out_dir, "directory for CSV and manifest output");
  app.add_option("--config", c.config_path, "flat JSON file mirroring the flags");
  app.add_option("--threshold-rule", c.threshold_rule, "ICBS threshold: scaled (kappa*P_r/ln K) or literal (1/ln K)")
      ->check(CLI::IsMember({"scaled", "literal"}));
  app.add_option("--threshold-scale", c.threshold_scale, "kappa for the scaled threshold rule")
      ->check(CLI::PositiveNumber);
}

inline void resolve_seed(CLI::App& sub, CommonOptions& c) {
  if (sub.count("--seed") > 0) return;
  if (const char* env = std::getenv("RELAYSIM_SEED")) {
    try {
      std::size_t used = 0;
      c.seed = std::stoull(env, &used);
      if (env[used] != '\0') throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ContractViolation(std::string("RELAYSIM_SEED is not an unsigned integer: ") + env);
    }
  }
}

inline nlohmann::json common_json(const CommonOptions& c) {
  return {{"M", c.antennas},          {"N", c.relay_antennas},     {"snr-db", c.snr_db},
          {"trials", c.trials},       {"seed", c.seed},            {"workers", c.workers},
          {"threshold-rule", c.threshold_rule}, {"threshold-scale", c.threshold_scale}};
}

inline ExperimentConfig make_experiment(const CommonOptions& c) {
  ExperimentConfig cfg;
  cfg.antennas = c.antennas;
  cfg.relay_antennas = c.relay_antennas;
  cfg.snr_db = c.snr_db;
  cfg.trials = c.trials;
  cfg.seed = c.seed;
  cfg.workers = c.workers;
  cfg.threshold = make_threshold(c);
  return cfg;
}

inline std::vector<Series> parse_series_list(const std::vector<std::string>& names) {
  std::vector<Series> out;
  for (const auto& n : names) {
    const auto s = parse_series(n);
    if (!s) throw ContractViolation("unknown scheme: " + n);
    if (std::find(out.begin(), out.end(), *s) == out.end()) out.push_back(*s);
  }
  if (out.empty()) throw ContractViolation("no schemes selected");
  return out;
}

inline std::string header_line(const std::string& command, const CommonOptions& c, const std::string& extra) {
  return fmt::format("# {} {} | rates in {} | {} (natural log) | M={} N={} trials={} seed={}{}\n", kVersion, command,
                     kRateUnits, describe_threshold(make_threshold(c)), c.antennas, c.relay_antennas, c.trials,
                     c.seed, extra.empty() ? "" : " | " + extra);
}

inline std::filesystem::path prepare_out_dir(const CommonOptions& c) {
  std::filesystem::path dir(c.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ContractViolation("cannot create output directory: " + c.out_dir);
  return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ContractViolation("cannot write " + p.string());
  out << content;
}

inline void write_manifest(const std::filesystem::path& p, const RunManifest& m) {
  write_file(p, nlohmann::json(m).dump(2) + "\n");
}

inline std::string rate_rows_csv(const std::vector<RateRow>& rows, bool snr_first) {
  std::string csv = snr_first ? "snr_db,K,scheme,mean_bits,stderr,trials,mean_alpha,mean_active,empty_active_frac\n"
                              : "K,scheme,mean_bits,stderr,trials,mean_alpha,mean_active,empty_active_frac\n";
  for (const auto& r : rows) {
    if (snr_first) csv += num(r.snr_db) + ",";
    csv += fmt::format("{},{},{},{},{},{},{},{}\n", r.relays, to_string(r.series), num(r.estimate.mean),
                       num(r.estimate.standard_error), r.estimate.trials, opt_num(r.mean_alpha),
                       opt_num(r.mean_active), opt_num(r.empty_active_frac));
  }
  return csv;
}

// Runs a command body, timing it into the manifest.
struct Session {
  RunManifest manifest;
  explicit Session(nlohmann::json config, std::uint64_t seed) {
    manifest.config = std::move(config);
    manifest.seed = seed;
    manifest.started = utc_now();
  }
};

inline int cmd_rate_vs_k(const CommonOptions& c, const std::vector<int>& relays, const std::vector<std::string>& schemes,
                         std::ostream& log) {
  ExperimentConfig cfg = make_experiment(c);
  cfg.relays_grid = relays;
  cfg.series = parse_series_list(schemes);
  if (cfg.snr_db.size() != 1) throw ContractViolation("rate-vs-k takes a single --snr-db value");
  cfg.validate();
  if (cfg.trials < 100) throw ContractViolation("rate-vs-k needs at least 100 trials per point");

  auto cfg_json = common_json(c);
  cfg_json["k"] = relays;
  cfg_json["schemes"] = schemes;
  Session s(cfg_json, c.seed);
  const auto rows = run_rate_vs_k(cfg);
  const auto dir = prepare_out_dir(c);
  write_file(dir / "rate_vs_k.csv",
             header_line("rate-vs-k", c, "snr_db=" + num(c.snr_db.front())) + rate_rows_csv(rows, false));
  s.manifest.outputs["csv"] = (dir / "rate_vs_k.csv").string();
  s.manifest.finished = utc_now();
  write_manifest(dir / "rate_vs_k.manifest.json", s.manifest);
  log << "wrote " << (dir / "rate_vs_k.csv").string() << " (" << rows.size() << " rows)\n";
  return kOk;
}

inline int cmd_multiplexing(const CommonOptions& c, int relays, const std::vector<std::string>& schemes,
                            std::ostream& log) {
  ExperimentConfig cfg = make_experiment(c);
  cfg.relays_grid = {relays};
  cfg.series = parse_series_list(schemes);
  if (cfg.snr_db.size() < 2) throw ContractViolation("multiplexing needs at least two --snr-db points");
  cfg.validate();
  if (cfg.trials < 100) throw ContractViolation("multiplexing needs at least 100 trials per point");

  auto cfg_json = common_json(c);
  cfg_json["K"] = relays;
  cfg_json["schemes"] = schemes;
  Session s(cfg_json, c.seed);
  const SnrTable table = run_rate_vs_snr(cfg);
  const auto dir = prepare_out_dir(c);
  write_file(dir / "multiplexing.csv",
             header_line("multiplexing", c, fmt::format("K={}", relays)) + rate_rows_csv(table.rows, true));
  nlohmann::json slopes = nlohmann::json::object();
  for (const auto& f : table.slopes)
    slopes[std::string(to_string(f.series))] = {{"bits_per_doubling", f.bits_per_doubling},
                                                {"normalized_by_M_over_2", f.bits_per_doubling / (0.5 * c.antennas)},
                                                {"fitted_snr_db", f.fitted_snr_db}};
  s.manifest.summary = {{"slopes", slopes}};
  s.manifest.outputs["csv"] = (dir / "multiplexing.csv").string();
  s.manifest.finished = utc_now();
  write_manifest(dir / "multiplexing.manifest.json", s.manifest);
  for (const auto& f : table.slopes)
    log << to_string(f.series) << " slope " << num(f.bits_per_doubling) << " bits per doubling\n";
  return kOk;
}

inline int cmd_relay_power(const CommonOptions& c, const std::vector<int>& relays, const std::vector<std::string>& rules,
                           std::ostream& log) {
  ExperimentConfig cfg = make_experiment(c);
  cfg.relays_grid = relays;
  cfg.relay_power_rules.clear();
  for (const auto& r : rules) {
    const auto rule = parse_relay_power_rule(r);
    if (!rule) throw ContractViolation("unknown relay power rule: " + r);
    cfg.relay_power_rules.push_back(*rule);
  }
  if (cfg.snr_db.size() != 1) throw ContractViolation("relay-power takes a single --snr-db value");
  cfg.validate();
  if (cfg.trials < 100) throw ContractViolation("relay-power needs at least 100 trials per point");

  auto cfg_json = common_json(c);
  cfg_json["k"] = relays;
  cfg_json["rule"] = rules;
  Session s(cfg_json, c.seed);
  const auto rows = run_relay_power_sweep(cfg);
  std::string csv = header_line("relay-power", c, "snr_db=" + num(c.snr_db.front()) + " gap=equal-power ICBS minus rule ICBS (paired)");
  csv += "K,rule,relay_power,mean_bits,stderr,trials,baseline_bits,gap_bits,gap_stderr,mean_active,empty_active_frac\n";
  for (const auto& r : rows)
    csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.relays, r.rule.name, num(r.relay_power),
                       num(r.icbs.mean), num(r.icbs.standard_error), r.icbs.trials, num(r.baseline.mean),
                       num(r.gap.mean), num(r.gap.standard_error), num(r.mean_active), num(r.empty_active_frac));
  const auto dir = prepare_out_dir(c);
  write_file(dir / "relay_power.csv", csv);
  s.manifest.outputs["csv"] = (dir / "relay_power.csv").string();
  s.manifest.finished = utc_now();
  write_manifest(dir / "relay_power.manifest.json", s.manifest);
  log << "wrote " << (dir / "relay_power.csv").string() << " (" << rows.size() << " rows)\n";
  return kOk;
}

inline int cmd_outage(const CommonOptions& c, const std::vector<int>& relays, const std::string& target_kind,
                      double margin_c, double target_bits, std::ostream& log) {
  ExperimentConfig cfg = make_experiment(c);
  cfg.relays_grid = relays;
  if (cfg.snr_db.size() != 1) throw ContractViolation("outage takes a single --snr-db value");
  cfg.validate();
  if (cfg.trials < 100) throw ContractViolation("outage needs at least 100 trials per point");
  OutageTarget target;
  if (target_kind == "fixed")
    target = {OutageTarget::Kind::kFixed, target_bits};
  else if (target_kind == "realization")
    target = {OutageTarget::Kind::kRealizationCutSetMinusMargin, margin_c};
  else
    target = {OutageTarget::Kind::kErgodicCutSetMinusMargin, margin_c};

  auto cfg_json = common_json(c);
  cfg_json["k"] = relays;
  cfg_json["target"] = target_kind;
  cfg_json["margin-c"] = margin_c;
  cfg_json["target-bits"] = target_bits;
  Session s(cfg_json, c.seed);
  const auto rows = run_outage_probe(cfg, target);
  std::string csv = header_line("outage", c, "snr_db=" + num(c.snr_db.front()) + " target=" + target.describe());
  csv += "K,target_bits,outage,ci_low,ci_high,trials,icbs_mean_bits,cut_set_mean_bits\n";
  for (const auto& r : rows)
    csv += fmt::format("{},{},{},{},{},{},{},{}\n", r.relays, num(r.target_bits), num(r.outage.estimate),
                       num(r.outage.lower), num(r.outage.upper), r.outage.trials, num(r.icbs.mean), num(r.cut_set.mean));
  const auto dir = prepare_out_dir(c);
  write_file(dir / "outage.csv", csv);
  s.manifest.outputs["csv"] = (dir / "outage.csv").string();
  s.manifest.finished = utc_now();
  write_manifest(dir / "outage.manifest.json", s.manifest);
  log << "wrote " << (dir / "outage.csv").string() << " (" << rows.size() << " rows)\n";
  return kOk;
}

struct LemmaOptions {
  std::size_t samples = 10000;
  std::string probe = "all";
  int relays = 16;  // beta-dist
  std::vector<int> tail_relays{16, 32, 64, 128};
  std::size_t tail_samples = 2000;
  int deactivation_relays = 32;
  std::size_t lemma5_trials = 500;
  std::vector<int> lemma5_s{500, 2000, 5000};
  bool antennas_given = false;
};

struct ProbeRow {
  std::string probe;
  std::string case_;
  double statistic = 0.0;
  double threshold = 0.0;
  std::size_t samples = 0;
  double mean = 0.0;
  double target = 0.0;
  bool pass = false;
  std::string note;
};

inline std::vector<ProbeRow> run_lemma_probes(const CommonOptions& c, const LemmaOptions& o) {
  std::vector<ProbeRow> rows;
  const bool all = o.probe == "all";
  const int m = o.antennas_given ? c.antennas : std::min(c.antennas, c.relay_antennas);
  const PowerConfig powers = PowerConfig::equal(db_to_linear(c.snr_db.front()));
  const ThresholdSchedule rule = make_threshold(c);

  if (all || o.probe == "beta-dist") {
    const NetworkDims dims{o.relays, m, c.relay_antennas};
    const auto rep = check_unitary_block_norm_dist(dims, o.samples, c.seed, c.workers);
    rows.push_back({"beta-dist", fmt::format("N={} K={} M={} target=Beta({},{})", dims.relay_antennas, dims.relays,
                                             dims.antennas, dims.relay_antennas, dims.relay_antennas * (dims.relays - 1)),
                    rep.statistic, rep.critical, rep.samples, rep.empirical_mean, rep.target_mean, rep.pass,
                    fmt::format("mean z={}", num(rep.mean_z()))});
  }
  if (all || o.probe == "min-eig") {
    const auto rep = check_min_eig_exponential(m, o.samples, c.seed, c.workers);
    const bool mean_ok = rep.mean_z() < 3.0;
    rows.push_back({"min-eig", fmt::format("m={} target=Exponential({})", m, m), rep.statistic, rep.critical,
                    rep.samples, rep.empirical_mean, rep.target_mean, rep.pass && mean_ok,
                    fmt::format("mean z={}", num(rep.mean_z()))});
  }
  if (all || o.probe == "lemma5") {
    const auto pts = check_lemma5_concentration(2, o.lemma5_s, o.lemma5_trials, c.seed, c.workers);
    const bool ok = lemma5_concentrates(pts);
    for (const auto& p : pts)
      rows.push_back({"lemma5", fmt::format("r=2 s={}", p.s), std::abs(p.mean - 1.0), 1.0 - lemma5_lower_band(p.s),
                      o.lemma5_trials, p.mean, 1.0, ok, fmt::format("stddev={}", num(p.stddev))});
  }
  if (all || o.probe == "interference-tail") {
    std::vector<Proportion> pts;
    std::vector<ProbeRow> tail_rows;
    for (int k : o.tail_relays) {
      ProbeConfig pc{{k, m, c.relay_antennas}, o.tail_samples, lemma4_schedule(k, powers, rule), powers, c.seed, c.workers};
      const auto rep = probe_interference_tail(pc);
      pts.push_back(rep.exceed);
      tail_rows.push_back({"interference-tail", fmt::format("K={} xi={}", k, num(rep.xi)), rep.exceed.estimate,
                           rep.exceed.upper, o.tail_samples, rep.mean_interference, rep.xi, false,
                           fmt::format("ci=[{},{}]", num(rep.exceed.lower), num(rep.exceed.upper))});
    }
    const bool ok = tail_trend_decreasing(pts);
    for (auto& r : tail_rows) r.pass = ok, rows.push_back(r);
  }
  if (all || o.probe == "deactivation") {
    const int k = o.deactivation_relays;
    const NetworkDims dims{k, m, c.relay_antennas};
    ProbeConfig pc{dims, o.tail_samples, lemma4_schedule(k, powers, rule), powers, c.seed, c.workers};
    const auto dea = probe_deactivation_prob(pc);
    const auto tail = probe_interference_tail(pc);
    const double bound = interference_tail_bound(dims, pc.schedule, dea);
    const bool ok = bound >= tail.exceed.lower;
    rows.push_back({"deactivation", fmt::format("K={} P[A_k]", k), dea.switched_off.estimate, dea.switched_off.upper,
                    dea.switched_off.trials, dea.switched_off.estimate, 0.0, ok,
                    fmt::format("ci=[{},{}]", num(dea.switched_off.lower), num(dea.switched_off.upper))});
    rows.push_back({"deactivation", fmt::format("K={} P[B_k]", k), dea.heavy_block.estimate, dea.heavy_block.upper,
                    dea.heavy_block.trials, dea.heavy_block.estimate, 0.0, ok,
                    fmt::format("ci=[{},{}]", num(dea.heavy_block.lower), num(dea.heavy_block.upper))});
    rows.push_back({"deactivation", fmt::format("K={} bound>=P[v>xi]", k), bound, tail.exceed.lower, o.tail_samples,
                    tail.exceed.estimate, bound, ok, "Markov bound from pooled frequencies"});
  }
  return rows;
}

inline int cmd_validate_lemmas(const CommonOptions& c, const LemmaOptions& o, std::ostream& log) {
  if (o.samples < kMinProbeSamples || o.tail_samples < kMinProbeSamples)
    throw ContractViolation("validate-lemmas needs at least 100 samples");
  auto cfg_json = common_json(c);
  cfg_json["samples"] = o.samples;
  cfg_json["probe"] = o.probe;
  Session s(cfg_json, c.seed);
  const auto rows = run_lemma_probes(c, o);

  std::string csv = header_line("validate-lemmas", c, "KS threshold 1.63/sqrt(n)");
  csv += "probe,case,statistic,threshold,samples,mean,target,pass,note\n";
  bool all_pass = true;
  nlohmann::json results = nlohmann::json::array();
  for (const auto& r : rows) {
    all_pass = all_pass && r.pass;
    csv += fmt::format("{},\"{}\",{},{},{},{},{},{},\"{}\"\n", r.probe, r.case_, num(r.statistic), num(r.threshold),
                       r.samples, num(r.mean), num(r.target), r.pass ? "pass" : "FAIL", r.note);
    results.push_back({{"probe", r.probe}, {"case", r.case_}, {"statistic", r.statistic}, {"pass", r.pass}});
    log << (r.pass ? "pass " : "FAIL ") << r.probe << " " << r.case_ << " statistic=" << num(r.statistic) << "\n";
  }
  const auto dir = prepare_out_dir(c);
  write_file(dir / "lemmas.csv", csv);
  s.manifest.summary = {{"all_pass", all_pass}, {"probes", results}};
  s.manifest.outputs["csv"] = (dir / "lemmas.csv").string();
  s.manifest.finished = utc_now();
  write_manifest(dir / "lemmas.manifest.json", s.manifest);
  return all_pass ? kOk : kValidationFailed;
}

inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Monte Carlo rates of cooperative beamforming in parallel MIMO relay networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonOptions common;
  std::vector<std::string> schemes{"CBS", "ICBS", "BNOP", "CUT_SET", "CU_STAR", "R_S"};

  auto* rate = app.add_subcommand("rate-vs-k", "rates versus number of relays");
  add_common(*rate, common);
  std::vector<int> rate_k{4, 8, 16, 32, 64};
  rate->add_option("--k", rate_k, "relay counts")->delimiter(',')->check(CLI::PositiveNumber);
  rate->add_option("--schemes", schemes, "subset of CBS,ICBS,BNOP,CUT_SET,CU_STAR,R_S")->delimiter(',');

  auto* mux = app.add_subcommand("multiplexing", "rates versus SNR and high-SNR slopes");
  add_common(*mux, common);
  int mux_k = 4;
  mux->add_option("--K", mux_k, "relay count")->check(CLI::PositiveNumber);
  mux->add_option("--schemes", schemes, "subset of CBS,ICBS,BNOP,CUT_SET,CU_STAR,R_S")->delimiter(',');

  auto* power = app.add_subcommand("relay-power", "ICBS under reduced relay power");
  add_common(*power, common);
  std::vector<int> power_k{16, 32, 64, 128};
  std::vector<std::string> rules{"equal", "inv-sqrt-k", "inv-k2"};
  power->add_option("--k", power_k, "relay counts")->delimiter(',')->check(CLI::PositiveNumber);
  power->add_option("--rule", rules, "equal, inv-sqrt-k, inv-k2 or pow:<exponent>")->delimiter(',');

  auto* outage = app.add_subcommand("outage", "ICBS outage below a target rate");
  add_common(*outage, common);
  std::vector<int> outage_k{16, 64};
  std::string target_kind = "ergodic";
  double margin_c = 2.0, target_bits = 0.0;
  outage->add_option("--k", outage_k, "relay counts")->delimiter(',')->check(CLI::PositiveNumber);
  outage->add_option("--target", target_kind, "ergodic, realization or fixed")
      ->check(CLI::IsMember({"ergodic", "realization", "fixed"}));
  outage->add_option("--margin-c", margin_c, "target = cut-set - c/ln K");
  outage->add_option("--target-bits", target_bits, "target rate for --target fixed");

  auto* lemmas = app.add_subcommand("validate-lemmas", "empirical checks of the random-matrix lemmas");
  add_common(*lemmas, common);
  LemmaOptions lo;
  lemmas->add_option("--samples", lo.samples, "samples per distribution check");
  lemmas->add_option("--probe", lo.probe, "all, beta-dist, min-eig, lemma5, interference-tail, deactivation")
      ->check(CLI::IsMember({"all", "beta-dist", "min-eig", "lemma5", "interference-tail", "deactivation"}));
  lemmas->add_option("--K", lo.relays, "relay count for beta-dist")->check(CLI::Range(2, 1 << 20));
  lemmas->add_option("--tail-k", lo.tail_relays, "relay grid for interference-tail")->delimiter(',');
  lemmas->add_option("--tail-samples", lo.tail_samples, "draws per interference-tail point");
  lemmas->add_option("--lemma5-trials", lo.lemma5_trials, "trials per s for lemma5");

  try {
    args = merge_config(args);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    resolve_seed(*sub, common);
    if (sub == rate) return cmd_rate_vs_k(common, rate_k, schemes, out);
    if (sub == mux) {
      if (sub->count("--snr-db") == 0) common.snr_db = {10, 20, 30, 40};
      return cmd_multiplexing(common, mux_k, schemes, out);
    }
    if (sub == power) return cmd_relay_power(common, power_k, rules, out);
    if (sub == outage) return cmd_outage(common, outage_k, target_kind, margin_c, target_bits, out);
    if (sub == lemmas) {
      lo.antennas_given = sub->count("--M") > 0;
      return cmd_validate_lemmas(common, lo, out);
    }
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericFailure& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  }
  return kUsage;
}

}  // namespace relaysim::cli
