#pragma once

// Small statistics helpers: summation, estimates, intervals, KS distance,
// slope fits.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "relaysim/errors.hpp"

namespace relaysim {

/// Pairwise (cascade) summation; result depends only on the element order.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

inline MeanEstimate estimate_mean(std::span<const double> xs) {
  require(!xs.empty(), "estimate_mean: no samples");
  MeanEstimate e;
  e.count = xs.size();
  const double n = static_cast<double>(xs.size());
  e.mean = pairwise_sum(xs) / n;
  if (xs.size() < 2) return e;
  std::vector<double> dev(xs.size());
  std::transform(xs.begin(), xs.end(), dev.begin(), [&](double x) { return (x - e.mean) * (x - e.mean); });
  e.stddev = std::sqrt(pairwise_sum(dev) / (n - 1.0));
  e.standard_error = e.stddev / std::sqrt(n);
  return e;
}

struct Proportion {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t successes = 0;
  std::size_t trials = 0;

  [[nodiscard]] bool overlaps(const Proportion& o) const { return lower <= o.upper && o.lower <= upper; }
};

/// Wilson score interval; z = 1.96 is a two-sided 95% interval.
inline Proportion wilson_interval(std::size_t successes, std::size_t trials, double z = 1.96) {
  require(trials > 0, "wilson_interval: no trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  return {p, std::max(0.0, centre - half), std::min(1.0, centre + half), successes, trials};
}

/// One-sample Kolmogorov-Smirnov sup distance against a continuous CDF.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  require(!samples.empty(), "ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return std::clamp(d, 0.0, 1.0);
}

// Asymptotic 1% critical value of the one-sample KS statistic.
inline double ks_critical_1pct(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

/// Least-squares slope of y against x.
inline double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "least_squares_slope: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  require(sxx > 0.0, "least_squares_slope: x values are all equal");
  return sxy / sxx;
}

}  // namespace relaysim
