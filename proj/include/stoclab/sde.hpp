#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "stoclab/common.hpp"
#include "stoclab/langevin.hpp"
#include "stoclab/moments.hpp"
#include "stoclab/parallel.hpp"
#include "stoclab/rng.hpp"
#include "stoclab/time_grid.hpp"

namespace stoclab {

/// Explicit Ito step:
///   phi' = phi + [-K phi + U(phi)] dt + b(phi) sqrt(D dt) xi.
inline double step_euler_maruyama(const LangevinSpec& spec, double phi, double dt, double xi) {
  require(spec.interpretation == Interpretation::Ito, errc::wrong_interpretation,
          "Euler-Maruyama integrates the Ito interpretation");
  const double dw = std::sqrt(spec.noise_strength * dt) * xi;
  return phi + spec.drift(phi) * dt + spec.noise_amp(phi) * dw;
}

/// Heun predictor-corrector consistent with the Stratonovich interpretation:
/// predictor uses the Euler increment, corrector averages drift and noise
/// amplitude between the two endpoints against the same Wiener increment.
inline double step_stratonovich_heun(const LangevinSpec& spec, double phi, double dt, double xi) {
  require(spec.interpretation == Interpretation::Stratonovich, errc::wrong_interpretation,
          "Heun integrates the Stratonovich interpretation");
  const double dw = std::sqrt(spec.noise_strength * dt) * xi;
  const double a0 = spec.drift(phi);
  const double b0 = spec.noise_amp(phi);
  const double pred = phi + a0 * dt + b0 * dw;
  const double a1 = spec.drift(pred);
  const double b1 = spec.noise_amp(pred);
  return phi + 0.5 * (a0 + a1) * dt + 0.5 * (b0 + b1) * dw;
}

enum class SdeScheme { EulerMaruyama, StratonovichHeun };

struct SdeOptions {
  std::size_t block_size = 1024;  // trajectories per reduction block
  unsigned n_threads = 1;
};

namespace detail {

inline void check_scheme(const LangevinSpec& spec, SdeScheme scheme) {
  if (scheme == SdeScheme::EulerMaruyama)
    require(spec.interpretation == Interpretation::Ito, errc::wrong_interpretation,
            "Euler-Maruyama requires an Ito spec");
  else
    require(spec.interpretation == Interpretation::Stratonovich, errc::wrong_interpretation,
            "Heun requires a Stratonovich spec");
}

inline double advance(const LangevinSpec& spec, SdeScheme scheme, double phi, double dt,
                      double xi) {
  return scheme == SdeScheme::EulerMaruyama ? step_euler_maruyama(spec, phi, dt, xi)
                                            : step_stratonovich_heun(spec, phi, dt, xi);
}

}  // namespace detail

/// Streams an ensemble of trajectories and accumulates per-time moments of
/// orders 1 and 2. Trajectory i draws from substream (seed, i); results are
/// independent of thread count.
inline EnsembleMoments simulate_ensemble(const LangevinSpec& spec, SdeScheme scheme,
                                         const TimeGrid& grid,
                                         const std::function<double(RngStream&)>& initial,
                                         std::size_t n_traj, std::uint64_t seed,
                                         const SdeOptions& opts = {}) {
  detail::check_scheme(spec, scheme);
  require(n_traj >= 2, errc::too_few_samples, "n_traj must be at least 2");
  const std::size_t nt = grid.size();
  const double dt = grid.dt();
  const std::size_t n_blocks = block_count(n_traj, opts.block_size);
  std::vector<detail::PowerSums> parts(n_blocks, detail::PowerSums(nt));
  parallel_blocks(n_traj, opts.block_size, opts.n_threads,
                  [&](std::size_t b, std::size_t begin, std::size_t end) {
                    detail::PowerSums& sums = parts[b];
                    for (std::size_t traj = begin; traj < end; ++traj) {
                      RngStream rng(seed, traj);
                      double phi = initial(rng);
                      sums.add(0, phi);
                      for (std::size_t k = 1; k < nt; ++k) {
                        phi = detail::advance(spec, scheme, phi, dt, rng.normal());
                        sums.add(k, phi);
                      }
                      ++sums.count;
                    }
                  });
  detail::PowerSums total = pairwise_reduce(
      std::move(parts), [](detail::PowerSums& a, const detail::PowerSums& b) { a.merge(b); });
  return detail::finalize_moments(grid, total);
}

inline EnsembleMoments simulate_ensemble(const LangevinSpec& spec, SdeScheme scheme,
                                         const TimeGrid& grid, double phi0, std::size_t n_traj,
                                         std::uint64_t seed, const SdeOptions& opts = {}) {
  return simulate_ensemble(
      spec, scheme, grid, [phi0](RngStream&) { return phi0; }, n_traj, seed, opts);
}

/// Monte Carlo estimate of E[phi(t1) ... phi(tm)] for descending times within
/// the grid span; each time is snapped to the nearest grid point.
inline MultiTimeEstimate sample_multitime_moment(const LangevinSpec& spec, SdeScheme scheme,
                                                 const TimeGrid& grid, double phi0,
                                                 const std::vector<double>& times_desc,
                                                 std::size_t n_traj, std::uint64_t seed,
                                                 const SdeOptions& opts = {}) {
  detail::check_scheme(spec, scheme);
  require(n_traj >= 2, errc::too_few_samples, "n_traj must be at least 2");
  require(!times_desc.empty(), errc::times_out_of_range, "need at least one time");
  require(times_desc.size() <= 4, errc::too_many_times, "at most 4 times supported");
  const double dt = grid.dt();
  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < times_desc.size(); ++i) {
    const double t = times_desc[i];
    if (i > 0)
      require(t < times_desc[i - 1], errc::non_descending_times, "times must strictly descend");
    require(t >= grid.t0 - 1e-12 && t <= grid.tf + 1e-12, errc::times_out_of_range,
            "time outside grid span");
    const double pos = (t - grid.t0) / dt;
    indices.push_back(static_cast<std::size_t>(std::llround(pos)));
  }
  const std::size_t nt = grid.size();
  struct Part {
    double sum = 0.0, sumsq = 0.0;
    std::size_t count = 0;
  };
  const std::size_t n_blocks = block_count(n_traj, opts.block_size);
  std::vector<Part> parts(n_blocks);
  parallel_blocks(n_traj, opts.block_size, opts.n_threads,
                  [&](std::size_t b, std::size_t begin, std::size_t end) {
                    Part& part = parts[b];
                    std::vector<double> recorded(indices.size());
                    for (std::size_t traj = begin; traj < end; ++traj) {
                      RngStream rng(seed, traj);
                      double phi = phi0;
                      for (std::size_t m = 0; m < indices.size(); ++m)
                        if (indices[m] == 0) recorded[m] = phi;
                      for (std::size_t k = 1; k < nt; ++k) {
                        phi = detail::advance(spec, scheme, phi, dt, rng.normal());
                        for (std::size_t m = 0; m < indices.size(); ++m)
                          if (indices[m] == k) recorded[m] = phi;
                      }
                      double prod = 1.0;
                      for (double v : recorded) prod *= v;
                      part.sum += prod;
                      part.sumsq += prod * prod;
                      ++part.count;
                    }
                  });
  Part total = pairwise_reduce(std::move(parts), [](Part& a, const Part& b) {
    a.sum += b.sum;
    a.sumsq += b.sumsq;
    a.count += b.count;
  });
  MultiTimeEstimate est;
  est.n_samples = total.count;
  const double dn = static_cast<double>(total.count);
  est.value = total.sum / dn;
  const double var = std::max(0.0, total.sumsq / dn - est.value * est.value) * dn / (dn - 1.0);
  est.std_error = std::sqrt(var / dn);
  return est;
}

}  // namespace stoclab
