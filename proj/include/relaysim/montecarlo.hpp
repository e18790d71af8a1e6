#pragma once

// Experiment sweeps over relay count, SNR, and relay-power rules.
//
// Every scheme at a grid point is evaluated on the same channel draws: trial i
// at relay count K always uses derive_seed(master, K, i). Results therefore
// do not depend on the worker count, on the order points are evaluated in,
// or on which schemes were requested alongside.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relaysim/capacity.hpp"
#include "relaysim/channel.hpp"
#include "relaysim/errors.hpp"
#include "relaysim/parallel.hpp"
#include "relaysim/schemes.hpp"
#include "relaysim/seeding.hpp"
#include "relaysim/stats.hpp"

namespace relaysim {

enum class Series { kCbs, kIcbs, kBnop, kCutSet, kCuStar, kRs };

inline constexpr Series kAllSeries[] = {Series::kCbs, Series::kIcbs, Series::kBnop,
                                        Series::kCutSet, Series::kCuStar, Series::kRs};

inline std::string_view to_string(Series s) {
  switch (s) {
    case Series::kCbs: return "CBS";
    case Series::kIcbs: return "ICBS";
    case Series::kBnop: return "BNOP";
    case Series::kCutSet: return "CUT_SET";
    case Series::kCuStar: return "CU_STAR";
    case Series::kRs: return "R_S";
  }
  return "?";
}

inline std::optional<Series> parse_series(std::string_view name) {
  for (Series s : kAllSeries)
    if (to_string(s) == name) return s;
  return std::nullopt;
}

inline bool is_closed_form(Series s) { return s == Series::kCuStar || s == Series::kRs; }

/// P_r(K) = P_s * K^(-exponent).
struct RelayPowerRule {
  std::string name = "equal";
  double exponent = 0.0;

  [[nodiscard]] double relay_power(int relays, double p_source) const {
    return p_source * std::pow(static_cast<double>(relays), -exponent);
  }
  static RelayPowerRule equal() { return {"equal", 0.0}; }
  static RelayPowerRule inv_sqrt_k() { return {"inv-sqrt-k", 0.5}; }
  static RelayPowerRule inv_k2() { return {"inv-k2", 2.0}; }
};

inline std::optional<RelayPowerRule> parse_relay_power_rule(std::string_view name) {
  if (name == "equal") return RelayPowerRule::equal();
  if (name == "inv-sqrt-k") return RelayPowerRule::inv_sqrt_k();
  if (name == "inv-k2") return RelayPowerRule::inv_k2();
  if (name.starts_with("pow:")) {
    try {
      std::size_t used = 0;
      const std::string tail(name.substr(4));
      const double e = std::stod(tail, &used);
      if (used == tail.size() && std::isfinite(e)) return RelayPowerRule{std::string(name), e};
    } catch (const std::exception&) {
    }
  }
  return std::nullopt;
}

struct ExperimentConfig {
  std::vector<int> relays_grid{4, 8, 16, 32, 64};
  int antennas = 2;
  int relay_antennas = 2;
  std::vector<double> snr_db{10.0};
  std::vector<RelayPowerRule> relay_power_rules{RelayPowerRule::equal()};
  std::size_t trials = 2000;
  std::uint64_t seed = 1;
  std::vector<Series> series{Series::kCbs, Series::kIcbs, Series::kBnop,
                             Series::kCutSet, Series::kCuStar, Series::kRs};
  ThresholdSchedule threshold;
  int workers = 1;

  [[nodiscard]] NetworkDims dims(int relays) const { return {relays, antennas, relay_antennas}; }

  void validate() const {
    require(!relays_grid.empty() && !snr_db.empty() && !series.empty() && !relay_power_rules.empty(),
            "ExperimentConfig: grids must be nonempty");
    for (int k : relays_grid) dims(k).validate();
    for (double db : snr_db) require(std::isfinite(db), "ExperimentConfig: SNR must be finite");
    require(trials >= 2, "ExperimentConfig: need at least two trials");
    require(threshold.scale > 0.0, "ExperimentConfig: threshold scale must be positive");
  }
};

struct RateRow {
  int relays = 0;
  double snr_db = 0.0;
  Series series = Series::kCbs;
  RateEstimate estimate;
  // Only meaningful for CBS, ICBS and BNOP.
  std::optional<double> mean_alpha;
  std::optional<double> mean_active;
  std::optional<double> empty_active_frac;
};

namespace detail {

struct TrialValues {
  std::vector<double> value;  // one per series
  std::vector<SchemeOutcome> outcome;
};

inline TrialValues evaluate_trial(const ChannelRealization& real, const PowerConfig& powers,
                                  const std::vector<Series>& series, const ThresholdSchedule& threshold) {
  TrialValues tv{std::vector<double>(series.size()), std::vector<SchemeOutcome>(series.size())};
  std::optional<BeamformPlan> plan;
  auto get_plan = [&]() -> const BeamformPlan& {
    if (!plan) plan = compute_plan(real, powers);
    return *plan;
  };
  for (std::size_t j = 0; j < series.size(); ++j) {
    SchemeOutcome o;
    switch (series[j]) {
      case Series::kCbs: o = rate_cbs(get_plan(), powers); break;
      case Series::kIcbs: {
        const auto& p = get_plan();
        o = rate_icbs(real, p, icbs_activate(p, threshold(real.dims.relays, powers), powers), powers);
        break;
      }
      case Series::kBnop: {
        const BnopResult b = bnop_matched_filter(real, powers);
        o = {b.rate_bits, 0.0, real.dims.relays, false};
        break;
      }
      case Series::kCutSet: o.rate_bits = cut_set_rate(real, powers.source); break;
      case Series::kCuStar: o.rate_bits = closed_form_cu_star(real.dims, powers.source); break;
      case Series::kRs: o.rate_bits = r_s(real.dims, powers.source); break;
    }
    tv.value[j] = o.rate_bits;
    tv.outcome[j] = o;
  }
  return tv;
}

inline std::vector<TrialValues> run_trials(const NetworkDims& dims, const PowerConfig& powers,
                                           const std::vector<Series>& series, const ThresholdSchedule& threshold,
                                           std::size_t trials, std::uint64_t seed, int workers) {
  std::vector<TrialValues> out(trials);
  const bool needs_channel = std::any_of(series.begin(), series.end(), [](Series s) { return !is_closed_form(s); });
  parallel_for(trials, workers, [&](std::size_t i) {
    if (!needs_channel) {
      ChannelRealization shell{dims, {}, {}};
      out[i] = evaluate_trial(shell, powers, series, threshold);
      return;
    }
    const auto real = sample_realization(dims, derive_seed(seed, static_cast<std::uint64_t>(dims.relays), i));
    out[i] = evaluate_trial(real, powers, series, threshold);
  });
  return out;
}

inline std::vector<RateRow> summarize(int relays, double snr_db, const std::vector<Series>& series,
                                      const std::vector<TrialValues>& trials) {
  std::vector<RateRow> rows;
  const std::size_t n = trials.size();
  for (std::size_t j = 0; j < series.size(); ++j) {
    std::vector<double> v(n), alpha(n), active(n), empty(n);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = trials[i].value[j];
      alpha[i] = trials[i].outcome[j].alpha;
      active[i] = trials[i].outcome[j].active;
      empty[i] = trials[i].outcome[j].empty_active ? 1.0 : 0.0;
    }
    RateRow row{relays, snr_db, series[j], to_rate_estimate(v), {}, {}, {}};
    if (is_closed_form(series[j])) {
      // Channel independent: every trial holds the same value.
      row.estimate.mean = v.front();
      row.estimate.standard_error = 0.0;
    }
    if (series[j] == Series::kCbs || series[j] == Series::kIcbs || series[j] == Series::kBnop) {
      if (series[j] != Series::kBnop) row.mean_alpha = pairwise_sum(alpha) / static_cast<double>(n);
      row.mean_active = pairwise_sum(active) / static_cast<double>(n);
      row.empty_active_frac = pairwise_sum(empty) / static_cast<double>(n);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

/// Rates at every relay count for the first SNR in the config.
inline std::vector<RateRow> run_rate_vs_k(const ExperimentConfig& cfg) {
  cfg.validate();
  const double snr = cfg.snr_db.front();
  const PowerConfig powers = PowerConfig::equal(db_to_linear(snr));
  std::vector<RateRow> rows;
  for (int k : cfg.relays_grid) {
    const auto trials = detail::run_trials(cfg.dims(k), powers, cfg.series, cfg.threshold, cfg.trials, cfg.seed, cfg.workers);
    auto point = detail::summarize(k, snr, cfg.series, trials);
    rows.insert(rows.end(), point.begin(), point.end());
  }
  return rows;
}

struct SlopeFit {
  Series series = Series::kCbs;
  double bits_per_doubling = 0.0;
  std::vector<double> fitted_snr_db;
};

struct SnrTable {
  std::vector<RateRow> rows;
  std::vector<SlopeFit> slopes;
};

/// Top half of an ascending SNR grid (rounded up, at least two points).
inline std::vector<double> high_snr_points(std::vector<double> snr_db) {
  std::sort(snr_db.begin(), snr_db.end());
  const std::size_t keep = std::max<std::size_t>(2, (snr_db.size() + 1) / 2);
  return {snr_db.end() - static_cast<std::ptrdiff_t>(std::min(keep, snr_db.size())), snr_db.end()};
}

/// Rates across the SNR grid at the first relay count, plus the high-SNR
/// slope of each series in bits per doubling of P.
inline SnrTable run_rate_vs_snr(const ExperimentConfig& cfg) {
  cfg.validate();
  require(cfg.snr_db.size() >= 2, "run_rate_vs_snr: need at least two SNR points");
  const int k = cfg.relays_grid.front();
  SnrTable table;
  for (double snr : cfg.snr_db) {
    const PowerConfig powers = PowerConfig::equal(db_to_linear(snr));
    const auto trials = detail::run_trials(cfg.dims(k), powers, cfg.series, cfg.threshold, cfg.trials, cfg.seed, cfg.workers);
    auto point = detail::summarize(k, snr, cfg.series, trials);
    table.rows.insert(table.rows.end(), point.begin(), point.end());
  }
  const auto fit_points = high_snr_points(cfg.snr_db);
  for (Series s : cfg.series) {
    std::vector<double> x, y;
    for (double snr : fit_points)
      for (const auto& row : table.rows)
        if (row.series == s && row.snr_db == snr) {
          x.push_back(std::log2(db_to_linear(snr)));
          y.push_back(row.estimate.mean);
          break;
        }
    table.slopes.push_back({s, least_squares_slope(x, y), fit_points});
  }
  return table;
}

struct RelayPowerRow {
  int relays = 0;
  RelayPowerRule rule;
  double relay_power = 0.0;
  RateEstimate icbs;
  RateEstimate baseline;  // ICBS with P_r = P_s on the same draws
  RateEstimate gap;       // paired baseline - rule
  double mean_active = 0.0;
  double empty_active_frac = 0.0;
};

/// ICBS rate under each relay-power rule against the equal-power baseline.
inline std::vector<RelayPowerRow> run_relay_power_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const double p = db_to_linear(cfg.snr_db.front());
  const std::vector<Series> icbs_only{Series::kIcbs};
  std::vector<RelayPowerRow> rows;
  for (int k : cfg.relays_grid) {
    const auto dims = cfg.dims(k);
    const auto base = detail::run_trials(dims, PowerConfig::equal(p), icbs_only, cfg.threshold, cfg.trials, cfg.seed, cfg.workers);
    for (const auto& rule : cfg.relay_power_rules) {
      const PowerConfig powers{p, rule.relay_power(k, p)};
      const auto runs = detail::run_trials(dims, powers, icbs_only, cfg.threshold, cfg.trials, cfg.seed, cfg.workers);
      std::vector<double> r(cfg.trials), b(cfg.trials), g(cfg.trials), act(cfg.trials), empty(cfg.trials);
      for (std::size_t i = 0; i < cfg.trials; ++i) {
        r[i] = runs[i].value[0];
        b[i] = base[i].value[0];
        g[i] = b[i] - r[i];
        act[i] = runs[i].outcome[0].active;
        empty[i] = runs[i].outcome[0].empty_active ? 1.0 : 0.0;
      }
      const double n = static_cast<double>(cfg.trials);
      rows.push_back({k, rule, powers.relay, to_rate_estimate(r), to_rate_estimate(b), to_rate_estimate(g),
                      pairwise_sum(act) / n, pairwise_sum(empty) / n});
    }
  }
  return rows;
}

/// Target rate for the outage probe.
struct OutageTarget {
  enum class Kind { kFixed, kErgodicCutSetMinusMargin, kRealizationCutSetMinusMargin };
  Kind kind = Kind::kErgodicCutSetMinusMargin;
  double value = 2.0;  // bits for kFixed, margin constant c otherwise (margin = c / ln K)

  [[nodiscard]] std::string describe() const {
    switch (kind) {
      case Kind::kFixed: return "fixed";
      case Kind::kErgodicCutSetMinusMargin: return "ergodic-cut-set-minus-c/lnK";
      case Kind::kRealizationCutSetMinusMargin: return "realization-cut-set-minus-c/lnK";
    }
    return "?";
  }
};

struct OutageRow {
  int relays = 0;
  double target_bits = 0.0;  // mean target across trials
  Proportion outage;
  RateEstimate icbs;
  RateEstimate cut_set;
};

/// Fraction of draws whose ICBS mutual information falls below the target.
inline std::vector<OutageRow> run_outage_probe(const ExperimentConfig& cfg, const OutageTarget& target) {
  cfg.validate();
  const PowerConfig powers = PowerConfig::equal(db_to_linear(cfg.snr_db.front()));
  const std::vector<Series> both{Series::kIcbs, Series::kCutSet};
  std::vector<OutageRow> rows;
  for (int k : cfg.relays_grid) {
    const bool margin = target.kind != OutageTarget::Kind::kFixed;
    require(!margin || k >= 2, "run_outage_probe: margin rules need at least two relays");
    const auto trials = detail::run_trials(cfg.dims(k), powers, both, cfg.threshold, cfg.trials, cfg.seed, cfg.workers);
    std::vector<double> icbs(cfg.trials), cut(cfg.trials), tgt(cfg.trials);
    for (std::size_t i = 0; i < cfg.trials; ++i) icbs[i] = trials[i].value[0], cut[i] = trials[i].value[1];
    const RateEstimate cut_est = to_rate_estimate(cut);
    const double margin_bits = margin ? target.value / std::log(static_cast<double>(k)) : 0.0;
    std::size_t below = 0;
    for (std::size_t i = 0; i < cfg.trials; ++i) {
      switch (target.kind) {
        case OutageTarget::Kind::kFixed: tgt[i] = target.value; break;
        case OutageTarget::Kind::kErgodicCutSetMinusMargin: tgt[i] = cut_est.mean - margin_bits; break;
        case OutageTarget::Kind::kRealizationCutSetMinusMargin: tgt[i] = cut[i] - margin_bits; break;
      }
      below += icbs[i] < tgt[i];
    }
    rows.push_back({k, pairwise_sum(tgt) / static_cast<double>(cfg.trials), wilson_interval(below, cfg.trials),
                    to_rate_estimate(icbs), cut_est});
  }
  return rows;
}

}  // namespace relaysim
