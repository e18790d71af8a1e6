#pragma once

// Network channel draws and the generic amplify-and-forward end-to-end model
//
//   y = (sum_k G_k F_k H_k) x + sum_k G_k F_k n_k + z
//
// with x white at P_s / M per antenna and unit-variance noise everywhere.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "relaysim/errors.hpp"
#include "relaysim/matrix_kernels.hpp"

namespace relaysim {

struct NetworkDims {
  int relays = 1;          // K
  int antennas = 1;        // M, transmitter and receiver
  int relay_antennas = 1;  // N >= M

  void validate() const {
    require(relays >= 1 && antennas >= 1 && relay_antennas >= 1, "NetworkDims: sizes must be positive");
    require(relay_antennas >= antennas, "NetworkDims: relay antennas must be >= terminal antennas");
  }
  friend bool operator==(const NetworkDims&, const NetworkDims&) = default;
};

// Linear (not dB) transmit powers.
struct PowerConfig {
  double source = 1.0;
  double relay = 1.0;

  void validate() const {
    require(std::isfinite(source) && source > 0.0, "PowerConfig: source power must be positive");
    require(std::isfinite(relay) && relay > 0.0, "PowerConfig: relay power must be positive");
  }
  static PowerConfig equal(double p) { return {p, p}; }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct ChannelRealization {
  NetworkDims dims;
  std::vector<ComplexMatrix> uplinks;    // H_k, N x M
  std::vector<ComplexMatrix> downlinks;  // G_k, M x N
};

inline ComplexMatrix sample_cn_matrix(Index rows, Index cols, std::mt19937_64& gen) {
  // CN(0,1): independent real and imaginary parts of variance 1/2.
  std::normal_distribution<double> normal(0.0, std::numbers::sqrt2 / 2.0);
  ComplexMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      const double re = normal(gen);
      const double im = normal(gen);
      m(r, c) = Complex(re, im);
    }
  return m;
}

/// Draws every H_k and G_k i.i.d. CN(0,1). Relay k's pair is drawn before
/// relay k+1's, so a draw with K+1 relays extends the one with K relays.
inline ChannelRealization sample_realization(const NetworkDims& dims, std::uint64_t seed) {
  dims.validate();
  std::mt19937_64 gen(seed);
  ChannelRealization real{dims, {}, {}};
  real.uplinks.reserve(dims.relays);
  real.downlinks.reserve(dims.relays);
  for (int k = 0; k < dims.relays; ++k) {
    real.uplinks.push_back(sample_cn_matrix(dims.relay_antennas, dims.antennas, gen));
    real.downlinks.push_back(sample_cn_matrix(dims.antennas, dims.relay_antennas, gen));
  }
  return real;
}

/// Uplink stack [H_1; H_2; ...; H_K], NK x M.
inline ComplexMatrix stack_uplink(const ChannelRealization& real) {
  const auto& d = real.dims;
  ComplexMatrix stack(static_cast<Index>(d.relays) * d.relay_antennas, d.antennas);
  for (int k = 0; k < d.relays; ++k)
    stack.middleRows(static_cast<Index>(k) * d.relay_antennas, d.relay_antennas) = real.uplinks[k];
  return stack;
}

struct EffectiveChannel {
  ComplexMatrix h_eff;      // M x M
  ComplexMatrix noise_cov;  // M x M, >= I
  double input_cov_scale = 0.0;
};

inline EffectiveChannel end_to_end(const ChannelRealization& real, std::span<const ComplexMatrix> relay_mats,
                                   double p_source) {
  const auto& d = real.dims;
  require(relay_mats.size() == static_cast<std::size_t>(d.relays), "end_to_end: need one relay matrix per relay");
  const Index m = d.antennas;
  EffectiveChannel eff{ComplexMatrix::Zero(m, m), ComplexMatrix::Identity(m, m), p_source / m};
  for (int k = 0; k < d.relays; ++k) {
    const auto& f = relay_mats[k];
    require(f.rows() == d.relay_antennas && f.cols() == d.relay_antennas, "end_to_end: relay matrix must be N x N");
    const ComplexMatrix gf = real.downlinks[k] * f;
    eff.h_eff.noalias() += gf * real.uplinks[k];
    eff.noise_cov.noalias() += gf * gf.adjoint();
  }
  return eff;
}

/// E||F_k (H_k x + n_k)||^2 for white input of power p_source / M per antenna.
inline double relay_output_power(const ChannelRealization& real, int k, const ComplexMatrix& f_k, double p_source) {
  const auto& d = real.dims;
  require(k >= 0 && k < d.relays, "relay_output_power: relay index out of range");
  require(f_k.rows() == d.relay_antennas && f_k.cols() == d.relay_antennas,
          "relay_output_power: relay matrix must be N x N");
  const auto& h = real.uplinks[k];
  const ComplexMatrix received_cov =
      (p_source / d.antennas) * (h * h.adjoint()) + ComplexMatrix::Identity(d.relay_antennas, d.relay_antennas);
  return std::max(0.0, (f_k * received_cov * f_k.adjoint()).trace().real());
}

/// Joint-decoding mutual information 1/2 log2|I + s H H^H N^-1| in bits
/// (the 1/2 accounts for the two half-duplex slots).
inline double mutual_information_bits(const EffectiveChannel& eff) {
  const ComplexMatrix signal = eff.input_cov_scale * (eff.h_eff * eff.h_eff.adjoint());
  const double nats = logdet_hermitian_psd(eff.noise_cov + signal) - logdet_hermitian_psd(eff.noise_cov);
  return 0.5 * std::max(0.0, nats) / std::numbers::ln2;
}

/// Per-stream decoding: receive antenna m decodes stream m, treating the
/// other streams as noise. Bits, half-duplex factor included.
inline double per_stream_rate_bits(const EffectiveChannel& eff) {
  double bits = 0.0;
  for (Index m = 0; m < eff.h_eff.rows(); ++m) {
    const double row = eff.h_eff.row(m).squaredNorm();
    const double wanted = std::norm(eff.h_eff(m, m));
    const double signal = eff.input_cov_scale * wanted;
    const double interference = eff.input_cov_scale * std::max(0.0, row - wanted);
    bits += 0.5 * std::log2(1.0 + signal / (interference + eff.noise_cov(m, m).real()));
  }
  return bits;
}

}  // namespace relaysim
