#pragma once

// Empirical checks of the random-matrix facts the asymptotic analysis leans
// on: block norms of an isotropic unitary, the minimum Gram eigenvalue law,
// concentration of lambda_min for wide matrices, and the ICBS interference
// and deactivation tails.

#include <boost/math/distributions/beta.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "relaysim/capacity.hpp"
#include "relaysim/channel.hpp"
#include "relaysim/matrix_kernels.hpp"
#include "relaysim/parallel.hpp"
#include "relaysim/schemes.hpp"
#include "relaysim/seeding.hpp"
#include "relaysim/stats.hpp"

namespace relaysim {

inline constexpr std::size_t kMinProbeSamples = 100;

struct DistCheckReport {
  double statistic = 0.0;  // KS sup distance
  double critical = 0.0;
  std::size_t samples = 0;
  bool pass = false;
  double empirical_mean = 0.0;
  double empirical_var = 0.0;
  double target_mean = 0.0;
  double target_var = 0.0;

  // Distance of the sample mean from the target mean, in standard errors.
  [[nodiscard]] double mean_z() const {
    const double se = std::sqrt(target_var / static_cast<double>(samples));
    return se > 0.0 ? std::abs(empirical_mean - target_mean) / se : 0.0;
  }
};

inline DistCheckReport make_report(const std::vector<double>& xs, const std::function<double(double)>& cdf,
                                   double target_mean, double target_var) {
  DistCheckReport r;
  r.samples = xs.size();
  r.statistic = ks_statistic(xs, cdf);
  r.critical = ks_critical_1pct(xs.size());
  r.pass = r.statistic < r.critical;
  const MeanEstimate e = estimate_mean(xs);
  r.empirical_mean = e.mean;
  r.empirical_var = e.stddev * e.stddev;
  r.target_mean = target_mean;
  r.target_var = target_var;
  return r;
}

/// ||W||^2 for W = first column of the first N-row block of U, where U holds
/// the left singular vectors of the stacked uplink. One sample per draw.
inline std::vector<double> sample_unitary_block_norms(const NetworkDims& dims, std::size_t samples,
                                                      std::uint64_t seed, int workers = 1) {
  std::vector<double> out(samples);
  parallel_for(samples, workers, [&](std::size_t i) {
    const auto real = sample_realization(dims, derive_seed(seed, 0xA11CE, i));
    const SvdFactors f = svd_thin(stack_uplink(real), dims.antennas);
    out[i] = f.u.col(0).head(dims.relay_antennas).squaredNorm();
  });
  return out;
}

inline DistCheckReport ks_against_beta(const std::vector<double>& xs, double a, double b) {
  const boost::math::beta_distribution<double> dist(a, b);
  const double mean = a / (a + b);
  const double var = a * b / ((a + b) * (a + b) * (a + b + 1));
  return make_report(
      xs, [&](double x) { return boost::math::cdf(dist, std::clamp(x, 0.0, 1.0)); }, mean, var);
}

/// Block norm versus Beta(N, NK - N).
inline DistCheckReport check_unitary_block_norm_dist(const NetworkDims& dims, std::size_t samples,
                                                     std::uint64_t seed, int workers = 1) {
  dims.validate();
  require(dims.relays >= 2, "check_unitary_block_norm_dist: need at least two relays");
  const double n = dims.relay_antennas;
  return ks_against_beta(sample_unitary_block_norms(dims, samples, seed, workers), n, n * dims.relays - n);
}

inline std::vector<double> sample_square_min_eigenvalues(int m, std::size_t samples, std::uint64_t seed,
                                                         int workers = 1) {
  std::vector<double> out(samples);
  parallel_for(samples, workers, [&](std::size_t i) {
    std::mt19937_64 gen(derive_seed(seed, 0xE16, i));
    out[i] = min_gram_eigenvalue(sample_cn_matrix(m, m, gen));
  });
  return out;
}

/// Minimum Gram eigenvalue of an m x m CN(0,1) matrix versus Exponential(rate m).
inline DistCheckReport check_min_eig_exponential(int m, std::size_t samples, std::uint64_t seed, int workers = 1) {
  require(m >= 1, "check_min_eig_exponential: m must be positive");
  const double rate = m;
  return make_report(
      sample_square_min_eigenvalues(m, samples, seed, workers),
      [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); }, 1.0 / rate, 1.0 / (rate * rate));
}

struct ConcentrationPoint {
  int s = 0;
  double mean = 0.0;    // of lambda_min / s
  double stddev = 0.0;
  double standard_error = 0.0;
};

/// lambda_min(A A^H) / s for r x s CN(0,1) matrices A.
inline std::vector<ConcentrationPoint> check_lemma5_concentration(int r, const std::vector<int>& s_list,
                                                                  std::size_t trials, std::uint64_t seed,
                                                                  int workers = 1) {
  require(r >= 1 && r <= 4, "check_lemma5_concentration: r must be in [1, 4]");
  require(trials >= 2, "check_lemma5_concentration: need at least two trials");
  std::vector<ConcentrationPoint> out;
  for (int s : s_list) {
    require(s >= 10 * r, "check_lemma5_concentration: each s must be at least 10 r");
    std::vector<double> ratio(trials);
    parallel_for(trials, workers, [&](std::size_t i) {
      std::mt19937_64 gen(derive_seed(seed, static_cast<std::uint64_t>(s), i));
      ratio[i] = min_gram_eigenvalue(sample_cn_matrix(r, s, gen)) / s;
    });
    const MeanEstimate e = estimate_mean(ratio);
    out.push_back({s, e.mean, e.stddev, e.standard_error});
  }
  return out;
}

// Thresholds of the interference analysis at relay count K.
struct TailSchedule {
  double beta = kInfinity;  // activation threshold
  double gamma = 0.0;       // block-norm threshold
  double xi = 0.0;          // interference threshold
};

/// gamma = 2 ln K / K, xi = K / ln^2 K, beta from `rule`.
inline TailSchedule lemma4_schedule(int relays, const PowerConfig& powers, const ThresholdSchedule& rule) {
  require(relays >= 2, "lemma4_schedule: need at least two relays");
  const double lk = std::log(static_cast<double>(relays));
  return {rule(relays, powers), 2.0 * lk / relays, relays / (lk * lk)};
}

struct ProbeConfig {
  NetworkDims dims;
  std::size_t samples = 10000;
  TailSchedule schedule;
  PowerConfig powers = PowerConfig::equal(10.0);
  std::uint64_t seed = 1;
  int workers = 1;

  [[nodiscard]] double delta() const { return schedule.gamma / schedule.beta; }
  void validate() const {
    dims.validate();
    powers.validate();
    require(samples >= kMinProbeSamples, "ProbeConfig: at least 100 samples required");
    require(schedule.beta > 0.0 && schedule.gamma > 0.0 && schedule.xi > 0.0, "ProbeConfig: thresholds must be positive");
  }
};

struct TailReport {
  int relays = 0;
  double xi = 0.0;
  Proportion exceed;  // P[v > xi]
  double mean_interference = 0.0;
};

/// Fraction of draws whose ICBS interference norm v exceeds xi.
inline TailReport probe_interference_tail(const ProbeConfig& cfg) {
  cfg.validate();
  std::vector<double> v(cfg.samples);
  parallel_for(cfg.samples, cfg.workers, [&](std::size_t i) {
    const auto real = sample_realization(cfg.dims, derive_seed(cfg.seed, static_cast<std::uint64_t>(cfg.dims.relays), i));
    const BeamformPlan plan = compute_plan(real, cfg.powers);
    const Activation act = icbs_activate(plan, cfg.schedule.beta, cfg.powers);
    v[i] = interference_norm(real, plan, act);
  });
  std::size_t hits = 0;
  for (double x : v) hits += x > cfg.schedule.xi;
  return {cfg.dims.relays, cfg.schedule.xi, wilson_interval(hits, cfg.samples), estimate_mean(v).mean};
}

struct DeactivationReport {
  Proportion switched_off;  // P[beta_k > beta]
  Proportion heavy_block;   // P[||U_k||^2 > gamma]
};

/// Per-relay frequencies pooled over all relays and draws.
inline DeactivationReport probe_deactivation_prob(const ProbeConfig& cfg) {
  cfg.validate();
  const std::size_t k = static_cast<std::size_t>(cfg.dims.relays);
  std::vector<int> off(cfg.samples), heavy(cfg.samples);
  parallel_for(cfg.samples, cfg.workers, [&](std::size_t i) {
    const auto real = sample_realization(cfg.dims, derive_seed(cfg.seed, static_cast<std::uint64_t>(cfg.dims.relays), i));
    const BeamformPlan plan = compute_plan(real, cfg.powers);
    for (std::size_t r = 0; r < k; ++r) {
      off[i] += plan.beta_loads[r] > cfg.schedule.beta;
      heavy[i] += plan.u_blocks[r].squaredNorm() > cfg.schedule.gamma;
    }
  });
  std::size_t off_total = 0, heavy_total = 0;
  for (std::size_t i = 0; i < cfg.samples; ++i) off_total += off[i], heavy_total += heavy[i];
  return {wilson_interval(off_total, cfg.samples * k), wilson_interval(heavy_total, cfg.samples * k)};
}

/// Right side of the Markov-style interference bound,
/// M N K^2 / xi * (P[B_k] + gamma P[A_k]), from the probe's estimates.
inline double interference_tail_bound(const NetworkDims& dims, const TailSchedule& sched,
                                      const DeactivationReport& rep) {
  const double k = dims.relays;
  return dims.antennas * dims.relay_antennas * k * k / sched.xi *
         (rep.heavy_block.estimate + sched.gamma * rep.switched_off.estimate);
}

/// Decreasing along the grid: adjacent points may tie within overlapping
/// intervals, non-adjacent points must be separated.
inline bool tail_trend_decreasing(const std::vector<Proportion>& points) {
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const auto& a = points[i];
    const auto& b = points[i + 1];
    if (!(b.estimate <= a.estimate || a.overlaps(b))) return false;
    for (std::size_t j = i + 2; j < points.size(); ++j)
      if (!(points[j].upper < a.lower)) return false;
  }
  return true;
}

/// Lower edge of the acceptable band for mean(lambda_min / s): the
/// O((ln s / s)^{1/4}) correction with a 1.2 multiplier (0.70 at s = 2000).
inline double lemma5_lower_band(int s) {
  return 1.0 - 1.2 * std::pow(std::log(static_cast<double>(s)) / s, 0.25);
}

inline bool lemma5_concentrates(const std::vector<ConcentrationPoint>& pts) {
  if (pts.size() < 2) return false;
  for (const auto& p : pts)
    if (p.mean < lemma5_lower_band(p.s) || p.mean > 1.0 + 3.0 * p.standard_error) return false;
  return std::abs(pts.back().mean - 1.0) < std::abs(pts.front().mean - 1.0);
}

}  // namespace relaysim
