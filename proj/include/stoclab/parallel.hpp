#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace stoclab {

/// Splits [0, n) into fixed-size blocks and invokes fn(block_index, begin, end)
/// for each. Block boundaries depend only on (n, block_size), so per-block
/// results are identical for any thread count; callers must write results
/// keyed by block_index and reduce in block order.
inline void parallel_blocks(std::size_t n, std::size_t block_size, unsigned n_threads,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  if (block_size == 0) block_size = 1;
  const std::size_t n_blocks = (n + block_size - 1) / block_size;
  if (n_threads <= 1 || n_blocks == 1) {
    for (std::size_t b = 0; b < n_blocks; ++b)
      fn(b, b * block_size, std::min(n, (b + 1) * block_size));
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t b = next.fetch_add(1);
      if (b >= n_blocks) return;
      fn(b, b * block_size, std::min(n, (b + 1) * block_size));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

inline std::size_t block_count(std::size_t n, std::size_t block_size) {
  return block_size == 0 ? n : (n + block_size - 1) / block_size;
}

/// Pairwise tree reduction in fixed order; combine(a, b) merges b into a.
template <class T, class Combine>
T pairwise_reduce(std::vector<T> parts, Combine combine) {
  while (parts.size() > 1) {
    std::vector<T> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
      combine(parts[i], parts[i + 1]);
      next.push_back(std::move(parts[i]));
    }
    if (parts.size() % 2 == 1) next.push_back(std::move(parts.back()));
    parts = std::move(next);
  }
  return std::move(parts.front());
}

}  // namespace stoclab
