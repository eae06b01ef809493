#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "stoclab/common.hpp"
#include "stoclab/master.hpp"
#include "stoclab/moments.hpp"
#include "stoclab/parallel.hpp"
#include "stoclab/rng.hpp"
#include "stoclab/time_grid.hpp"

namespace stoclab {

struct SsaStep {
  double waiting_time = 0.0;  // infinity when the state is absorbing
  long n_new = 0;
};

/// One event of the direct Gillespie method: exponential waiting time at the
/// total rate, channel chosen proportionally to its rate. Two uniforms per
/// event.
inline SsaStep gillespie_step(const MasterSpec& spec, long n, RngStream& rng) {
  const double total = spec.total_rate(n);
  if (total <= 0.0) return {std::numeric_limits<double>::infinity(), n};
  SsaStep step;
  step.waiting_time = rng.exponential(total);
  double target = rng.uniform() * total;
  double acc = 0.0;
  for (const auto& c : spec.channels) {
    acc += c.rate(n);
    if (target <= acc) {
      step.n_new = n + c.delta;
      return step;
    }
  }
  step.n_new = n + spec.channels.back().delta;  // guard against roundoff in the cumulative sum
  return step;
}

struct SsaOptions {
  std::size_t block_size = 1024;
  unsigned n_threads = 1;
};

using InitialOccupation = std::function<long(RngStream&)>;

inline InitialOccupation fixed_occupation(long n0) {
  return [n0](RngStream&) { return n0; };
}

/// Samples n0 from a discrete distribution (inverse CDF, one uniform).
inline InitialOccupation distribution_occupation(std::vector<double> probs) {
  double total = 0.0;
  for (double p : probs) total += p;
  return [probs = std::move(probs), total](RngStream& rng) {
    double target = rng.uniform() * total;
    double acc = 0.0;
    for (std::size_t n = 0; n < probs.size(); ++n) {
      acc += probs[n];
      if (target <= acc) return static_cast<long>(n);
    }
    return static_cast<long>(probs.size()) - 1;
  };
}

namespace detail {

template <class Record>
void run_ssa_trajectory(const MasterSpec& spec, const std::vector<double>& record_times, long n0,
                        RngStream& rng, Record&& record) {
  double t = 0.0;
  long n = n0;
  std::size_t next = 0;
  while (next < record_times.size()) {
    const SsaStep step = gillespie_step(spec, n, rng);
    const double t_event = t + step.waiting_time;
    while (next < record_times.size() && record_times[next] < t_event) {
      record(next, n);
      ++next;
    }
    if (!std::isfinite(t_event)) break;
    t = t_event;
    n = step.n_new;
  }
  while (next < record_times.size()) {
    record(next, n);
    ++next;
  }
}

}  // namespace detail

/// Moments of n at the grid times from n_traj exact jump trajectories;
/// trajectory i draws from substream (seed, i).
inline EnsembleMoments simulate_ssa_ensemble(const MasterSpec& spec, const TimeGrid& grid,
                                             const InitialOccupation& initial, std::size_t n_traj,
                                             std::uint64_t seed, const SsaOptions& opts = {}) {
  require(n_traj >= 2, errc::too_few_samples, "n_traj must be at least 2");
  const std::size_t nt = grid.size();
  const std::size_t n_blocks = block_count(n_traj, opts.block_size);
  std::vector<detail::PowerSums> parts(n_blocks, detail::PowerSums(nt));
  parallel_blocks(n_traj, opts.block_size, opts.n_threads,
                  [&](std::size_t b, std::size_t begin, std::size_t end) {
                    detail::PowerSums& sums = parts[b];
                    for (std::size_t traj = begin; traj < end; ++traj) {
                      RngStream rng(seed, traj);
                      const long n0 = initial(rng);
                      detail::run_ssa_trajectory(
                          spec, grid.points, n0, rng,
                          [&](std::size_t i, long n) { sums.add(i, static_cast<double>(n)); });
                      ++sums.count;
                    }
                  });
  detail::PowerSums total = pairwise_reduce(
      std::move(parts), [](detail::PowerSums& a, const detail::PowerSums& b) { a.merge(b); });
  return detail::finalize_moments(grid, total);
}

inline EnsembleMoments simulate_ssa_ensemble(const MasterSpec& spec, const TimeGrid& grid, long n0,
                                             std::size_t n_traj, std::uint64_t seed,
                                             const SsaOptions& opts = {}) {
  return simulate_ssa_ensemble(spec, grid, fixed_occupation(n0), n_traj, seed, opts);
}

/// Joint moment E[n(t1) ... n(tm)] for strictly descending times, recorded
/// within single trajectories so the joint law is preserved.
inline MultiTimeEstimate ssa_multitime(const MasterSpec& spec,
                                       const std::vector<double>& times_desc, long n0,
                                       std::size_t n_traj, std::uint64_t seed,
                                       const SsaOptions& opts = {}) {
  require(n_traj >= 2, errc::too_few_samples, "n_traj must be at least 2");
  require(!times_desc.empty(), errc::times_out_of_range, "need at least one time");
  require(times_desc.size() <= 3, errc::too_many_times, "at most 3 times supported");
  for (std::size_t i = 1; i < times_desc.size(); ++i)
    require(times_desc[i] < times_desc[i - 1], errc::non_descending_times,
            "times must strictly descend");
  require(times_desc.back() >= 0.0, errc::times_out_of_range, "times must be nonnegative");
  std::vector<double> ascending(times_desc.rbegin(), times_desc.rend());
  struct Part {
    double sum = 0.0, sumsq = 0.0;
    std::size_t count = 0;
  };
  const std::size_t n_blocks = block_count(n_traj, opts.block_size);
  std::vector<Part> parts(n_blocks);
  parallel_blocks(n_traj, opts.block_size, opts.n_threads,
                  [&](std::size_t b, std::size_t begin, std::size_t end) {
                    Part& part = parts[b];
                    std::vector<double> recorded(ascending.size());
                    for (std::size_t traj = begin; traj < end; ++traj) {
                      RngStream rng(seed, traj);
                      detail::run_ssa_trajectory(spec, ascending, n0, rng,
                                                 [&](std::size_t i, long n) {
                                                   recorded[i] = static_cast<double>(n);
                                                 });
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

/// Histogram of n at a single time, for distributional checks and dumps.
inline std::vector<std::uint64_t> simulate_ssa_histogram(const MasterSpec& spec, double t, long n0,
                                                         long max_n, std::size_t n_traj,
                                                         std::uint64_t seed,
                                                         const SsaOptions& opts = {}) {
  const std::vector<double> times{t};
  const std::size_t n_blocks = block_count(n_traj, opts.block_size);
  std::vector<std::vector<std::uint64_t>> parts(
      n_blocks, std::vector<std::uint64_t>(static_cast<std::size_t>(max_n) + 1, 0));
  parallel_blocks(n_traj, opts.block_size, opts.n_threads,
                  [&](std::size_t b, std::size_t begin, std::size_t end) {
                    auto& hist = parts[b];
                    for (std::size_t traj = begin; traj < end; ++traj) {
                      RngStream rng(seed, traj);
                      detail::run_ssa_trajectory(spec, times, n0, rng, [&](std::size_t, long n) {
                        const long idx = std::clamp(n, 0L, max_n);
                        ++hist[static_cast<std::size_t>(idx)];
                      });
                    }
                  });
  return pairwise_reduce(std::move(parts),
                         [](std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
                           for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
                         });
}

}  // namespace stoclab
