#pragma once

#include <cmath>
#include <cstdint>

namespace stoclab {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based substream generator (PCG64 XSL-RR). Each (seed, stream_id)
/// pair selects an independent sequence through a distinct odd increment, so
/// draws depend only on the pair and the draw index, never on the thread
/// schedule.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id) {
    std::uint64_t s = seed;
    u128 initstate = (static_cast<u128>(detail::splitmix64(s)) << 64) | detail::splitmix64(s);
    std::uint64_t t = stream_id ^ 0xDA3E39CB94B95BDBull;
    u128 initseq = (static_cast<u128>(detail::splitmix64(t)) << 64) | detail::splitmix64(t);
    inc_ = (initseq << 1) | 1u;
    state_ = 0;
    next_u64();
    state_ += initstate;
    next_u64();
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() {
    const u128 mult = (static_cast<u128>(0x2360ed051fc65da4ull) << 64) | 0x4385df649fccf645ull;
    u128 old = state_;
    state_ = old * mult + inc_;
    std::uint64_t xored = static_cast<std::uint64_t>(old >> 64) ^ static_cast<std::uint64_t>(old);
    unsigned rot = static_cast<unsigned>(old >> 122);
    return (xored >> rot) | (xored << ((64u - rot) & 63u));
  }

  /// Uniform draw strictly inside (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; pairs are cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(angle);
    has_cached_ = true;
    return r * std::cos(angle);
  }

  /// Exponential waiting time with the given rate.
  double exponential(double rate) { return -std::log(uniform()) / rate; }

 private:
  using u128 = unsigned __int128;
  u128 state_ = 0;
  u128 inc_ = 1;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

inline RngStream rng_stream(std::uint64_t seed, std::uint64_t stream_id) {
  return RngStream(seed, stream_id);
}

}  // namespace stoclab
