#pragma once

// Uplink cut-set bound and the closed-form anchors used to bracket it.
// All rates are bits per channel use with the half-duplex factor 1/2.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "relaysim/channel.hpp"
#include "relaysim/matrix_kernels.hpp"
#include "relaysim/parallel.hpp"
#include "relaysim/seeding.hpp"
#include "relaysim/stats.hpp"

namespace relaysim {

enum class BoundKind { kCutSetRealization, kCutSetErgodic, kClosedFormCuStar, kRs };

struct BoundValue {
  double value = 0.0;
  BoundKind kind = BoundKind::kCutSetRealization;
  // Set when an asymptotic anchor came out negative (tiny SNR).
  bool negative_anchor = false;
};

/// Per-realization uplink capacity 1/2 max_{tr Q <= P} log2|I + H Q H^H|,
/// attained by water-filling over the eigenmodes of H^H H.
inline double cut_set_rate(const ChannelRealization& real, double p_source) {
  require(p_source >= 0.0, "cut_set_rate: power must be nonnegative");
  const RealVector sigma = singular_values(stack_uplink(real));
  std::vector<double> gains;
  for (Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) * sigma(i) > 0.0) gains.push_back(sigma(i) * sigma(i));
  if (gains.empty()) return 0.0;
  const WaterFilling wf = water_fill(gains, p_source);
  double bits = 0.0;
  for (std::size_t i = 0; i < gains.size(); ++i) bits += 0.5 * std::log2(1.0 + gains[i] * wf.powers[i]);
  return bits;
}

/// (M/2) log2(1 + K N P / M), an upper bound on the ergodic cut-set rate.
inline double closed_form_cu_star(const NetworkDims& dims, double p_source) {
  const double m = dims.antennas;
  return 0.5 * m * std::log2(1.0 + dims.relays * dims.relay_antennas * p_source / m);
}

/// (M/2) log2(K N P / M). Negative for small K N P / M.
inline double r_s(const NetworkDims& dims, double p_source) {
  const double m = dims.antennas;
  const double snr = dims.relays * dims.relay_antennas * p_source / m;
  require(snr > 0.0, "r_s: K N P / M must be positive");
  return 0.5 * m * std::log2(snr);
}

inline BoundValue r_s_bound(const NetworkDims& dims, double p_source) {
  const double v = r_s(dims, p_source);
  return {v, BoundKind::kRs, v < 0.0};
}

struct RateEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t trials = 0;
};

inline RateEstimate to_rate_estimate(std::span<const double> samples) {
  const MeanEstimate e = estimate_mean(samples);
  return {e.mean, e.standard_error, e.count};
}

/// Evaluates `per_trial(trial_seed)` for every trial and averages. The seed
/// of trial i is derive_seed(master, stream, i).
inline std::vector<double> collect_trials(std::size_t trials, std::uint64_t master, std::uint64_t stream,
                                          const std::function<double(std::uint64_t)>& per_trial, int workers = 1) {
  std::vector<double> out(trials);
  parallel_for(trials, workers, [&](std::size_t i) { out[i] = per_trial(derive_seed(master, stream, i)); });
  return out;
}

/// Ergodic average of a per-realization evaluator over `trials` channel draws.
inline RateEstimate ergodic_average(const NetworkDims& dims,
                                    const std::function<double(const ChannelRealization&)>& evaluator,
                                    std::size_t trials, std::uint64_t master_seed, int workers = 1) {
  require(trials >= 2, "ergodic_average: need at least two trials");
  const auto samples = collect_trials(
      trials, master_seed, static_cast<std::uint64_t>(dims.relays),
      [&](std::uint64_t seed) { return evaluator(sample_realization(dims, seed)); }, workers);
  return to_rate_estimate(samples);
}

}  // namespace relaysim
