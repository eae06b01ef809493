#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "stoclab/common.hpp"
#include "stoclab/time_grid.hpp"

namespace stoclab {

/// Time-indexed Monte Carlo moment estimates with standard errors.
struct MomentSeries {
  TimeGrid grid;
  int order = 1;
  std::vector<double> mean_estimates;
  std::vector<double> std_errors;
  std::size_t n_samples = 0;
};

struct MultiTimeEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

/// First two raw moments plus the derived variance track, the common output
/// currency of the ensemble simulators.
struct EnsembleMoments {
  MomentSeries m1;  // order 1
  MomentSeries m2;  // order 2 (raw second moment)
  std::vector<double> variance;
  std::vector<double> variance_stderr;
  std::size_t n_samples = 0;
};

namespace detail {

/// Running power sums per time point, mergeable across trajectory blocks.
struct PowerSums {
  std::vector<double> s1, s2, s3, s4;
  std::size_t count = 0;

  explicit PowerSums(std::size_t n_times = 0)
      : s1(n_times, 0.0), s2(n_times, 0.0), s3(n_times, 0.0), s4(n_times, 0.0) {}

  void add(std::size_t i, double x) {
    const double x2 = x * x;
    s1[i] += x;
    s2[i] += x2;
    s3[i] += x2 * x;
    s4[i] += x2 * x2;
  }

  void merge(const PowerSums& other) {
    for (std::size_t i = 0; i < s1.size(); ++i) {
      s1[i] += other.s1[i];
      s2[i] += other.s2[i];
      s3[i] += other.s3[i];
      s4[i] += other.s4[i];
    }
    count += other.count;
  }
};

inline EnsembleMoments finalize_moments(const TimeGrid& grid, const PowerSums& sums) {
  const std::size_t n = sums.count;
  require(n >= 2, errc::too_few_samples, "need at least two samples to estimate spread");
  const double dn = static_cast<double>(n);
  EnsembleMoments out;
  out.n_samples = n;
  out.m1.grid = grid;
  out.m1.order = 1;
  out.m1.n_samples = n;
  out.m2.grid = grid;
  out.m2.order = 2;
  out.m2.n_samples = n;
  const std::size_t nt = sums.s1.size();
  out.m1.mean_estimates.resize(nt);
  out.m1.std_errors.resize(nt);
  out.m2.mean_estimates.resize(nt);
  out.m2.std_errors.resize(nt);
  out.variance.resize(nt);
  out.variance_stderr.resize(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    const double mean = sums.s1[i] / dn;
    const double raw2 = sums.s2[i] / dn;
    const double raw3 = sums.s3[i] / dn;
    const double raw4 = sums.s4[i] / dn;
    const double m2c = std::max(0.0, raw2 - mean * mean);
    const double m4c = std::max(
        0.0, raw4 - 4.0 * mean * raw3 + 6.0 * mean * mean * raw2 - 3.0 * mean * mean * mean * mean);
    const double svar = dn / (dn - 1.0) * m2c;
    out.m1.mean_estimates[i] = mean;
    out.m1.std_errors[i] = std::sqrt(svar / dn);
    out.m2.mean_estimates[i] = raw2;
    // y = x^2 treated as its own sample: Var(y) = E[x^4] - E[x^2]^2
    const double vy = std::max(0.0, raw4 - raw2 * raw2) * dn / (dn - 1.0);
    out.m2.std_errors[i] = std::sqrt(vy / dn);
    out.variance[i] = svar;
    // Var(s^2) = (m4c - (n-3)/(n-1) * m2c^2) / n
    const double vs2 = std::max(0.0, m4c - (dn - 3.0) / (dn - 1.0) * m2c * m2c) / dn;
    out.variance_stderr[i] = std::sqrt(vs2);
  }
  return out;
}

}  // namespace detail

}  // namespace stoclab
