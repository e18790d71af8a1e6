#pragma once

// Dense complex linear-algebra primitives shared by every other module.
// All functions are pure; no shared state.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "relaysim/errors.hpp"

namespace relaysim {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline bool all_finite(const ComplexMatrix& a) { return a.allFinite(); }

// Throws if any entry is NaN/Inf. Use at trust boundaries.
inline const ComplexMatrix& checked(const ComplexMatrix& a) {
  if (!all_finite(a)) throw ContractViolation("matrix has non-finite entries");
  return a;
}

inline double frobenius_norm_sq(const ComplexMatrix& a) { return a.squaredNorm(); }

/// Thin SVD a = u * diag(sigma) * v^H.
///
/// u is rows x r and v is cols x r with orthonormal columns; sigma is
/// non-increasing. r = min(rows, cols), or `rank` when given (which must not
/// exceed min(rows, cols)). Singular-vector phases are unspecified.
struct SvdFactors {
  ComplexMatrix u;
  RealVector sigma;
  ComplexMatrix v;

  [[nodiscard]] Index rank() const { return sigma.size(); }
  [[nodiscard]] ComplexMatrix reconstruct() const {
    return u * sigma.cast<Complex>().asDiagonal() * v.adjoint();
  }
};

inline SvdFactors svd_thin(const ComplexMatrix& a, std::optional<Index> rank = std::nullopt) {
  checked(a);
  const Index full = std::min(a.rows(), a.cols());
  const Index r = rank.value_or(full);
  require(r >= 0 && r <= full, "svd_thin: requested rank exceeds min(rows, cols)");
  if (full == 0) return {ComplexMatrix(a.rows(), 0), RealVector(0), ComplexMatrix(a.cols(), 0)};

  Eigen::JacobiSVD<ComplexMatrix, Eigen::ColPivHouseholderQRPreconditioner> svd(
      a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericFailure("svd_thin: decomposition did not converge");

  SvdFactors out{svd.matrixU().leftCols(r), svd.singularValues().head(r), svd.matrixV().leftCols(r)};
  if (!out.u.allFinite() || !out.v.allFinite() || !out.sigma.allFinite())
    throw NumericFailure("svd_thin: non-finite factors");
  return out;
}

inline RealVector singular_values(const ComplexMatrix& a) {
  checked(a);
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  if (svd.info() != Eigen::Success) throw NumericFailure("singular_values: decomposition did not converge");
  return svd.singularValues();
}

// Singular values at or below this are treated as zero by pseudo_inverse.
inline double rank_cutoff(Index rows, Index cols, double sigma_max) {
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * sigma_max;
}

/// Moore-Penrose pseudo-inverse (cols x rows).
inline ComplexMatrix pseudo_inverse(const ComplexMatrix& a) {
  if (a.size() == 0) return ComplexMatrix::Zero(a.cols(), a.rows());
  const SvdFactors f = svd_thin(a);
  const double cutoff = rank_cutoff(a.rows(), a.cols(), f.sigma.size() ? f.sigma(0) : 0.0);
  RealVector inv(f.sigma.size());
  for (Index i = 0; i < f.sigma.size(); ++i) inv(i) = f.sigma(i) > cutoff ? 1.0 / f.sigma(i) : 0.0;
  return f.v * inv.cast<Complex>().asDiagonal() * f.u.adjoint();
}

/// Smallest eigenvalue of a a^H for rows <= cols (squared smallest singular
/// value). For rows > cols this is min(sigma)^2 over the min(rows, cols) values.
inline double min_gram_eigenvalue(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  const RealVector s = singular_values(a);
  const double smin = s(s.size() - 1);
  return smin * smin;
}

/// Natural-log determinant of a Hermitian positive definite matrix.
inline double logdet_hermitian_psd(const ComplexMatrix& a) {
  require(a.rows() == a.cols(), "logdet_hermitian_psd: matrix must be square");
  checked(a);
  const double scale = std::max(a.norm(), std::numeric_limits<double>::min());
  if ((a - a.adjoint()).norm() > 1e-8 * scale)
    throw ContractViolation("logdet_hermitian_psd: matrix is not Hermitian");
  const ComplexMatrix herm = 0.5 * (a + a.adjoint());
  Eigen::LLT<ComplexMatrix> llt(herm);
  if (llt.info() != Eigen::Success) throw NumericFailure("logdet_hermitian_psd: non-positive pivot");
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Index i = 0; i < l.rows(); ++i) {
    const double pivot = l(i, i).real();
    if (!(pivot > 0.0)) throw NumericFailure("logdet_hermitian_psd: non-positive pivot");
    acc += std::log(pivot);
  }
  return 2.0 * acc;
}

/// Water-filling allocation p_i = max(0, level - 1/g_i) with sum p_i = budget.
struct WaterFilling {
  std::vector<double> powers;
  double level = 0.0;
};

inline WaterFilling water_fill(std::span<const double> gains, double budget) {
  require(!gains.empty(), "water_fill: empty gains");
  require(std::isfinite(budget) && budget >= 0.0, "water_fill: budget must be finite and nonnegative");
  for (double g : gains) require(std::isfinite(g) && g > 0.0, "water_fill: gains must be finite and positive");

  const std::size_t n = gains.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gains[a] > gains[b]; });

  // Largest active set whose weakest channel still sits below the water level.
  double inv_sum = 0.0;
  std::vector<double> prefix(n);
  for (std::size_t i = 0; i < n; ++i) prefix[i] = (inv_sum += 1.0 / gains[order[i]]);

  std::size_t active = 1;
  double level = (budget + prefix[0]);
  for (std::size_t a = n; a >= 1; --a) {
    const double mu = (budget + prefix[a - 1]) / static_cast<double>(a);
    if (mu >= 1.0 / gains[order[a - 1]]) {
      active = a;
      level = mu;
      break;
    }
  }

  WaterFilling out;
  out.level = level;
  out.powers.assign(n, 0.0);
  for (std::size_t i = 0; i < active; ++i) out.powers[order[i]] = std::max(0.0, level - 1.0 / gains[order[i]]);
  return out;
}

}  // namespace relaysim
