#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "stoclab/common.hpp"
#include "stoclab/polynomial.hpp"

namespace stoclab {

/// One reaction channel of a master equation: occupation jumps n -> n + delta
/// at rate rate_poly(n) per unit time.
struct ReactionChannel {
  int delta = 0;
  Polynomial rate_poly;

  double rate(long n) const { return rate_poly(static_cast<double>(n)); }
};

struct VerhulstRates {
  double beta = 0.0;    // death rate
  double lambda = 0.0;  // birth rate
  double gamma = 0.0;   // damping coefficient
};

struct MasterSpec {
  std::vector<ReactionChannel> channels;
  // Set when constructed from the birth/death/damping preset; retained so the
  // perturbative split can identify the linear relaxation rate.
  std::optional<VerhulstRates> verhulst;

  double total_rate(long n) const {
    double r = 0.0;
    for (const auto& c : channels) r += c.rate(n);
    return r;
  }

  int max_abs_delta() const {
    int m = 0;
    for (const auto& c : channels) m = std::max(m, std::abs(c.delta));
    return m;
  }

  /// Birth/death/damping process: n -> n-1 at beta*n, n -> n-1 at gamma*n^2,
  /// n -> n+1 at lambda*n. Always exactly three channels.
  static MasterSpec verhulst_preset(double beta, double lambda, double gamma) {
    MasterSpec s;
    s.channels.push_back({-1, Polynomial{0.0, beta}});
    s.channels.push_back({-1, Polynomial{0.0, 0.0, gamma}});
    s.channels.push_back({+1, Polynomial{0.0, lambda}});
    s.verhulst = VerhulstRates{beta, lambda, gamma};
    return s;
  }

  /// Pair coalescence A+A->A: n -> n-1 at gamma*n^2 (the beta=lambda=0 limit
  /// of the preset above).
  static MasterSpec annihilation_to_a(double gamma) {
    MasterSpec s;
    s.channels.push_back({-1, Polynomial{0.0, 0.0, gamma}});
    s.verhulst = VerhulstRates{0.0, 0.0, gamma};
    return s;
  }

  /// Pair annihilation A+A->0: n -> n-2 at k*n*(n-1).
  static MasterSpec annihilation_to_zero(double k) {
    MasterSpec s;
    s.channels.push_back({-2, Polynomial{0.0, -k, k}});
    return s;
  }
};

/// Checks rate nonnegativity on 0..n_check and that no channel can push the
/// occupation below zero with positive rate.
inline MasterSpec validate_master_spec(MasterSpec spec, long n_check = 128) {
  for (std::size_t ci = 0; ci < spec.channels.size(); ++ci) {
    const auto& c = spec.channels[ci];
    for (long n = 0; n <= n_check; ++n) {
      const double r = c.rate(n);
      require(r >= 0.0, errc::negative_rate,
              "channel " + std::to_string(ci) + " has negative rate at n=" + std::to_string(n));
      if (c.delta < 0 && n + c.delta < 0) {
        require(r == 0.0, errc::escape_below_zero,
                "channel " + std::to_string(ci) + " would leave n=" + std::to_string(n) +
                    " below zero");
      }
    }
  }
  return spec;
}

}  // namespace stoclab
