#pragma once

// Relay beamforming schemes.
//
// CBS: relay k applies F_k = alpha * pinv(G_k) * U_k^H, where U = [U_1; ...; U_K]
// holds the left singular vectors of the stacked uplink. The end-to-end
// channel becomes alpha * Lambda^{1/2} V^H with white noise (1 + alpha^2) I.
//
// ICBS: same, but relays whose load beta_k exceeds a threshold are switched
// off, so alpha is set by the worst *active* relay.
//
// BNOP: per-relay matched filter F_k = c_k G_k^H H_k^H, each relay at full
// power, streams decoded independently at the receiver.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string_view>
#include <vector>

#include "relaysim/channel.hpp"
#include "relaysim/errors.hpp"
#include "relaysim/matrix_kernels.hpp"

namespace relaysim {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Scheme { CBS, ICBS, BNOP };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::CBS: return "CBS";
    case Scheme::ICBS: return "ICBS";
    case Scheme::BNOP: return "BNOP";
  }
  return "?";
}

struct SchemeParams {
  Scheme scheme = Scheme::CBS;
  double beta_threshold = kInfinity;
  PowerConfig powers;

  void validate() const {
    powers.validate();
    if (scheme == Scheme::ICBS)
      require(std::isfinite(beta_threshold) && beta_threshold > 0.0, "SchemeParams: ICBS needs a finite threshold");
    else
      require(std::isinf(beta_threshold), "SchemeParams: only ICBS takes a threshold");
  }
};

struct BeamformPlan {
  std::vector<ComplexMatrix> u_blocks;  // U_k, N x M
  ComplexMatrix v;                      // M x M unitary
  RealVector lambda;                    // eigenvalues of H^H H, descending
  std::vector<double> beta_loads;       // +inf when G_k is rank deficient
};

// Which relays forward, and the common gain they use.
struct Activation {
  std::vector<bool> active;
  double alpha = 0.0;

  [[nodiscard]] int count() const { return static_cast<int>(std::count(active.begin(), active.end(), true)); }
  [[nodiscard]] bool empty() const { return count() == 0; }
};

/// pinv(G_k) U_k^H, or an empty matrix when G_k lacks full row rank.
inline ComplexMatrix zero_forcing_relay_matrix(const ComplexMatrix& g_k, const ComplexMatrix& u_k) {
  const RealVector s = singular_values(g_k);
  const double smax = s.size() ? s(0) : 0.0;
  if (s.size() < g_k.rows() || s(s.size() - 1) <= rank_cutoff(g_k.rows(), g_k.cols(), smax) || smax == 0.0)
    return {};
  return pseudo_inverse(g_k) * u_k.adjoint();
}

/// beta_k = E||pinv(G_k) U_k^H r_k||^2, the output power of relay k before
/// the common gain is applied.
inline double relay_load(const ChannelRealization& real, const ComplexMatrix& u_k, int k, const PowerConfig& powers) {
  const ComplexMatrix f = zero_forcing_relay_matrix(real.downlinks[k], u_k);
  if (f.size() == 0) return kInfinity;
  return relay_output_power(real, k, f, powers.source);
}

inline BeamformPlan compute_plan(const ChannelRealization& real, const PowerConfig& powers) {
  const auto& d = real.dims;
  const SvdFactors f = svd_thin(stack_uplink(real), d.antennas);
  BeamformPlan plan;
  plan.v = f.v;
  plan.lambda = f.sigma.array().square();
  plan.u_blocks.reserve(d.relays);
  plan.beta_loads.reserve(d.relays);
  for (int k = 0; k < d.relays; ++k) {
    plan.u_blocks.push_back(f.u.middleRows(static_cast<Index>(k) * d.relay_antennas, d.relay_antennas));
    plan.beta_loads.push_back(relay_load(real, plan.u_blocks.back(), k, powers));
  }
  return plan;
}

/// alpha = sqrt(P_r / max_k beta_k). A rank-deficient downlink (infinite
/// load) forces alpha = 0.
inline double cbs_gain(const BeamformPlan& plan, const PowerConfig& powers) {
  require(!plan.beta_loads.empty(), "cbs_gain: plan has no relays");
  const double worst = *std::max_element(plan.beta_loads.begin(), plan.beta_loads.end());
  require(worst > 0.0, "cbs_gain: all relay loads are zero");
  return std::sqrt(powers.relay / worst);
}

inline Activation cbs_activation(const BeamformPlan& plan, const PowerConfig& powers) {
  return {std::vector<bool>(plan.beta_loads.size(), true), cbs_gain(plan, powers)};
}

/// Activates relays with beta_k <= threshold; alpha from the worst active one.
inline Activation icbs_activate(const BeamformPlan& plan, double beta_threshold, const PowerConfig& powers) {
  require(beta_threshold > 0.0, "icbs_activate: threshold must be positive");
  Activation act;
  act.active.resize(plan.beta_loads.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < plan.beta_loads.size(); ++k) {
    const double b = plan.beta_loads[k];
    act.active[k] = std::isfinite(b) && b <= beta_threshold;
    if (act.active[k]) worst = std::max(worst, b);
  }
  if (act.empty()) return act;
  // Every active relay has zero load only if its U_k block vanishes.
  act.alpha = worst > 0.0 ? std::sqrt(powers.relay / worst) : kInfinity;
  return act;
}

/// 1 / ln K, with K = 1 mapped to +inf (ICBS reduces to CBS).
inline double default_threshold(int relays) {
  require(relays >= 1, "default_threshold: need at least one relay");
  return relays == 1 ? kInfinity : 1.0 / std::log(static_cast<double>(relays));
}

/// Threshold schedule used by experiments.
///
/// kLiteral is default_threshold(K). kRelayPowerScaled is scale * P_r / ln K,
/// which guarantees alpha^2 >= ln K / scale at any SNR and any relay power.
struct ThresholdSchedule {
  enum class Kind { kLiteral, kRelayPowerScaled };
  Kind kind = Kind::kRelayPowerScaled;
  double scale = 4.0;

  [[nodiscard]] double operator()(int relays, const PowerConfig& powers) const {
    const double base = default_threshold(relays);
    if (kind == Kind::kLiteral || std::isinf(base)) return base;
    return scale * powers.relay * base;
  }
  static ThresholdSchedule literal() { return {Kind::kLiteral, 1.0}; }
};

// Per-realization result of running a scheme.
struct SchemeOutcome {
  double rate_bits = 0.0;
  double alpha = 0.0;
  int active = 0;
  bool empty_active = false;
};

/// CBS and ICBS relay matrices alpha * pinv(G_k) U_k^H; inactive relays get 0.
inline std::vector<ComplexMatrix> beamforming_relay_matrices(const ChannelRealization& real,
                                                             const BeamformPlan& plan, const Activation& act) {
  const Index n = real.dims.relay_antennas;
  std::vector<ComplexMatrix> mats;
  mats.reserve(plan.u_blocks.size());
  for (std::size_t k = 0; k < plan.u_blocks.size(); ++k) {
    ComplexMatrix f = ComplexMatrix::Zero(n, n);
    if (act.active[k] && act.alpha > 0.0) {
      const ComplexMatrix zf = zero_forcing_relay_matrix(real.downlinks[k], plan.u_blocks[k]);
      if (zf.size()) f = act.alpha * zf;
    }
    mats.push_back(std::move(f));
  }
  return mats;
}

/// 1/2 log2|I + alpha^2/(1+alpha^2) (P_s/M) Lambda|.
inline double cbs_rate_bits(const RealVector& lambda, double alpha, const PowerConfig& powers) {
  const double a2 = alpha * alpha;
  const double weight = std::isinf(a2) ? 1.0 : a2 / (1.0 + a2);
  const double per_stream = powers.source / static_cast<double>(lambda.size());
  double bits = 0.0;
  for (Index i = 0; i < lambda.size(); ++i) bits += 0.5 * std::log2(1.0 + weight * per_stream * lambda(i));
  return bits;
}

inline SchemeOutcome rate_cbs(const BeamformPlan& plan, const PowerConfig& powers) {
  const Activation act = cbs_activation(plan, powers);
  return {cbs_rate_bits(plan.lambda, act.alpha, powers), act.alpha, act.count(), false};
}

inline SchemeOutcome rate_cbs(const ChannelRealization& real, const PowerConfig& powers) {
  return rate_cbs(compute_plan(real, powers), powers);
}

/// Residual end-to-end channel of ICBS: Lambda^{1/2} minus the contribution
/// the switched-off relays would have carried.
inline ComplexMatrix icbs_signal_matrix(const ChannelRealization& real, const BeamformPlan& plan,
                                        const Activation& act) {
  ComplexMatrix h_star = plan.lambda.array().sqrt().matrix().cast<Complex>().asDiagonal();
  for (std::size_t k = 0; k < plan.u_blocks.size(); ++k)
    if (!act.active[k]) h_star.noalias() -= plan.u_blocks[k].adjoint() * real.uplinks[k] * plan.v;
  return h_star;
}

/// alpha^2 sum_{active} U_k^H U_k + I.
inline ComplexMatrix icbs_noise_covariance(const BeamformPlan& plan, const Activation& act) {
  const Index m = plan.v.rows();
  ComplexMatrix acc = ComplexMatrix::Zero(m, m);
  for (std::size_t k = 0; k < plan.u_blocks.size(); ++k)
    if (act.active[k]) acc.noalias() += plan.u_blocks[k].adjoint() * plan.u_blocks[k];
  return act.alpha * act.alpha * acc + ComplexMatrix::Identity(m, m);
}

/// ||sum over switched-off relays of U_k^H H_k||_F^2.
inline double interference_norm(const ChannelRealization& real, const BeamformPlan& plan, const Activation& act) {
  const Index m = plan.v.rows();
  ComplexMatrix acc = ComplexMatrix::Zero(m, m);
  for (std::size_t k = 0; k < plan.u_blocks.size(); ++k)
    if (!act.active[k]) acc.noalias() += plan.u_blocks[k].adjoint() * real.uplinks[k];
  return acc.squaredNorm();
}

inline SchemeOutcome rate_icbs(const ChannelRealization& real, const BeamformPlan& plan, const Activation& act,
                               const PowerConfig& powers) {
  if (act.empty()) return {0.0, 0.0, 0, true};
  const Index m = plan.v.rows();
  // Unbounded gain only arises when every active U_k block is zero, in which
  // case the active relays carry no signal.
  if (std::isinf(act.alpha)) return {0.0, act.alpha, act.count(), false};
  const ComplexMatrix h_star = icbs_signal_matrix(real, plan, act);
  const ComplexMatrix noise = icbs_noise_covariance(plan, act);
  const double a2 = act.alpha * act.alpha;
  const ComplexMatrix signal = a2 * (powers.source / static_cast<double>(m)) * (h_star * h_star.adjoint());
  double nats = 0.0;
  try {
    nats = logdet_hermitian_psd(noise + signal) - logdet_hermitian_psd(noise);
  } catch (const NumericFailure&) {
    throw NumericFailure("rate_icbs: noise covariance is not positive definite");
  }
  return {0.5 * std::max(0.0, nats) / std::numbers::ln2, act.alpha, act.count(), false};
}

inline SchemeOutcome rate_icbs(const ChannelRealization& real, const PowerConfig& powers, double beta_threshold) {
  const BeamformPlan plan = compute_plan(real, powers);
  return rate_icbs(real, plan, icbs_activate(plan, beta_threshold, powers), powers);
}

struct BnopResult {
  std::vector<ComplexMatrix> relay_mats;
  double rate_bits = 0.0;        // per-stream decoding
  double joint_rate_bits = 0.0;  // joint decoding, diagnostic only
};

/// Matched filter F_k = c_k G_k^H H_k^H with c_k chosen so relay k transmits
/// exactly P_r. A relay with a zero hop stays silent.
inline BnopResult bnop_matched_filter(const ChannelRealization& real, const PowerConfig& powers) {
  const auto& d = real.dims;
  BnopResult out;
  out.relay_mats.reserve(d.relays);
  for (int k = 0; k < d.relays; ++k) {
    const ComplexMatrix mf = real.downlinks[k].adjoint() * real.uplinks[k].adjoint();
    const double unit_power = relay_output_power(real, k, mf, powers.source);
    const double c = unit_power > 0.0 && mf.squaredNorm() > 0.0 ? std::sqrt(powers.relay / unit_power) : 0.0;
    out.relay_mats.push_back(c * mf);
  }
  const EffectiveChannel eff = end_to_end(real, out.relay_mats, powers.source);
  out.rate_bits = per_stream_rate_bits(eff);
  out.joint_rate_bits = mutual_information_bits(eff);
  return out;
}

}  // namespace relaysim
