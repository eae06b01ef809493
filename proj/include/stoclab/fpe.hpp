#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "stoclab/common.hpp"
#include "stoclab/langevin.hpp"

namespace stoclab {

struct PdfGeometry {
  double phi_min = -1.0;
  double phi_max = 1.0;
  int n_cells = 64;

  double dphi() const { return (phi_max - phi_min) / n_cells; }
  double center(int i) const { return phi_min + (i + 0.5) * dphi(); }
  double face(int f) const { return phi_min + (f + 1) * dphi(); }  // between cells f and f+1
  int cell_of(double phi) const {
    int i = static_cast<int>(std::floor((phi - phi_min) / dphi()));
    return std::clamp(i, 0, n_cells - 1);
  }
};

/// Cell-averaged probability density on a uniform 1-d grid.
struct PdfGrid {
  PdfGeometry geom;
  std::vector<double> values;

  double mass() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * geom.dphi();
  }

  void normalize() {
    const double m = mass();
    require(m > 0.0, errc::degenerate_null_space, "cannot normalize zero-mass density");
    for (double& v : values) v /= m;
  }

  /// Grid moment  sum_i center_i^power * p_i * dphi.
  double moment(int power = 1) const {
    double s = 0.0;
    for (int i = 0; i < geom.n_cells; ++i)
      s += std::pow(geom.center(i), power) * values[static_cast<std::size_t>(i)];
    return s * geom.dphi();
  }

  double mean() const { return moment(1); }
  double variance() const {
    const double m = moment(1);
    return moment(2) - m * m;
  }

  /// Discrete delta: unit mass in the cell containing phi0.
  static PdfGrid delta(const PdfGeometry& geom, double phi0) {
    require(phi0 >= geom.phi_min && phi0 <= geom.phi_max, errc::out_of_grid,
            "initial point outside grid");
    PdfGrid p;
    p.geom = geom;
    p.values.assign(static_cast<std::size_t>(geom.n_cells), 0.0);
    p.values[static_cast<std::size_t>(geom.cell_of(phi0))] = 1.0 / geom.dphi();
    return p;
  }

  static PdfGrid from_function(const PdfGeometry& geom, const std::function<double(double)>& f) {
    PdfGrid p;
    p.geom = geom;
    p.values.resize(static_cast<std::size_t>(geom.n_cells));
    for (int i = 0; i < geom.n_cells; ++i)
      p.values[static_cast<std::size_t>(i)] = std::max(0.0, f(geom.center(i)));
    p.normalize();
    return p;
  }
};

namespace detail {

/// Bernoulli function w / (e^w - 1), stable near w = 0.
inline double bernoulli_fn(double w) {
  if (std::abs(w) < 1e-8) return 1.0 - 0.5 * w + w * w / 12.0;
  if (w > 700.0) return 0.0;
  return w / std::expm1(w);
}

}  // namespace detail

/// Conservative finite-volume discretization of the Fokker-Planck generator
/// with zero-flux boundaries. Both interpretations reduce to the face flux
///   F = W(x) p_face - Theta(x) (p_{i+1} - p_i) / dphi,    Theta = D b^2 / 2,
/// where the coefficient derivative is taken analytically on the polynomial
/// data:
///   Ito:          W = -K x + U(x) - D b b'
///   Stratonovich: W = -K x + U(x) - D b b' / 2
/// The face interpolation uses exponentially fitted (Chang-Cooper) weights so
/// off-diagonal rates stay nonnegative and the discrete stationary state has
/// zero flux through every face.
class FpeGenerator {
 public:
  FpeGenerator(PdfGeometry geom, Interpretation interp, std::vector<double> up,
               std::vector<double> down)
      : geom_(geom), interp_(interp), up_(std::move(up)), down_(std::move(down)) {}

  const PdfGeometry& geometry() const { return geom_; }
  Interpretation interpretation() const { return interp_; }
  int n_cells() const { return geom_.n_cells; }

  // Per-face transition rates: up[f] moves density f -> f+1, down[f] moves
  // f+1 -> f.
  const std::vector<double>& up_rates() const { return up_; }
  const std::vector<double>& down_rates() const { return down_; }

  /// out = G p.
  void apply(const std::vector<double>& p, std::vector<double>& out) const {
    const int n = geom_.n_cells;
    out.assign(static_cast<std::size_t>(n), 0.0);
    for (int f = 0; f < n - 1; ++f) {
      const double flow_up = up_[static_cast<std::size_t>(f)] * p[static_cast<std::size_t>(f)];
      const double flow_dn =
          down_[static_cast<std::size_t>(f)] * p[static_cast<std::size_t>(f + 1)];
      out[static_cast<std::size_t>(f)] += flow_dn - flow_up;
      out[static_cast<std::size_t>(f + 1)] += flow_up - flow_dn;
    }
  }

  /// Tridiagonal entries (sub, diag, super) of the generator matrix.
  std::tuple<std::vector<double>, std::vector<double>, std::vector<double>> tridiagonal() const {
    const int n = geom_.n_cells;
    std::vector<double> sub(static_cast<std::size_t>(n), 0.0);
    std::vector<double> diag(static_cast<std::size_t>(n), 0.0);
    std::vector<double> super(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      double out_rate = 0.0;
      if (i < n - 1) {
        out_rate += up_[static_cast<std::size_t>(i)];
        super[static_cast<std::size_t>(i)] = down_[static_cast<std::size_t>(i)];
      }
      if (i > 0) {
        out_rate += down_[static_cast<std::size_t>(i - 1)];
        sub[static_cast<std::size_t>(i)] = up_[static_cast<std::size_t>(i - 1)];
      }
      diag[static_cast<std::size_t>(i)] = -out_rate;
    }
    return {sub, diag, super};
  }

  std::vector<std::tuple<int, int, double>> triplets() const {
    auto [sub, diag, super] = tridiagonal();
    std::vector<std::tuple<int, int, double>> t;
    for (int i = 0; i < geom_.n_cells; ++i) {
      if (i > 0 && sub[static_cast<std::size_t>(i)] != 0.0)
        t.emplace_back(i, i - 1, sub[static_cast<std::size_t>(i)]);
      t.emplace_back(i, i, diag[static_cast<std::size_t>(i)]);
      if (i < geom_.n_cells - 1 && super[static_cast<std::size_t>(i)] != 0.0)
        t.emplace_back(i, i + 1, super[static_cast<std::size_t>(i)]);
    }
    return t;
  }

  double max_rate() const {
    double m = 0.0;
    for (double v : up_) m = std::max(m, v);
    for (double v : down_) m = std::max(m, v);
    return m;
  }

 private:
  PdfGeometry geom_;
  Interpretation interp_;
  std::vector<double> up_, down_;
};

inline FpeGenerator build_fpe_generator(const LangevinSpec& spec, const PdfGeometry& geom,
                                        Interpretation interp) {
  require(geom.n_cells >= 16, errc::grid_too_coarse, "need at least 16 cells");
  require(geom.phi_max > geom.phi_min, errc::non_positive_width, "phi_max must exceed phi_min");
  const double dphi = geom.dphi();
  const double D = spec.noise_strength;
  const Polynomial bprime = spec.noise_poly.derivative();
  const int n = geom.n_cells;
  std::vector<double> up(static_cast<std::size_t>(n - 1), 0.0);
  std::vector<double> down(static_cast<std::size_t>(n - 1), 0.0);
  for (int f = 0; f < n - 1; ++f) {
    const double x = geom.face(f);
    const double b = spec.noise_poly(x);
    const double bp = bprime(x);
    const double theta = 0.5 * D * b * b;
    double w_adv = spec.drift(x);
    if (interp == Interpretation::Ito)
      w_adv -= D * b * bp;
    else
      w_adv -= 0.5 * D * b * bp;
    double rate_up, rate_dn;
    if (theta > 0.0) {
      const double w = w_adv * dphi / theta;
      rate_up = theta / (dphi * dphi) * detail::bernoulli_fn(-w);
      rate_dn = theta / (dphi * dphi) * detail::bernoulli_fn(w);
    } else {
      rate_up = std::max(w_adv, 0.0) / dphi;
      rate_dn = std::max(-w_adv, 0.0) / dphi;
    }
    up[static_cast<std::size_t>(f)] = rate_up;
    down[static_cast<std::size_t>(f)] = rate_dn;
  }
  return FpeGenerator(geom, interp, std::move(up), std::move(down));
}

inline FpeGenerator build_fpe_generator(const LangevinSpec& spec, const PdfGeometry& geom) {
  return build_fpe_generator(spec, geom, spec.interpretation);
}

struct EvolveOptions {
  double rel_tol = 1e-8;   // L1 error target per unit evolved time (relative)
  double abs_tol = 1e-12;  // floor for the step tolerance
  std::size_t max_steps = 4'000'000;
};

namespace detail {

/// Thomas solve of (I - dt G) x = rhs; the system matrix is column
/// diagonally dominant, so elimination without pivoting is stable.
class BackwardEulerSolver {
 public:
  BackwardEulerSolver(const FpeGenerator& gen) : gen_(gen) {}

  void factor(double dt) {
    dt_ = dt;
    const int n = gen_.n_cells();
    const auto& up = gen_.up_rates();
    const auto& down = gen_.down_rates();
    cprime_.assign(static_cast<std::size_t>(n), 0.0);
    denom_.assign(static_cast<std::size_t>(n), 0.0);
    double prev_c = 0.0;
    for (int i = 0; i < n; ++i) {
      double diag = 1.0;
      if (i < n - 1) diag += dt * up[static_cast<std::size_t>(i)];
      if (i > 0) diag += dt * down[static_cast<std::size_t>(i - 1)];
      const double sub = i > 0 ? -dt * up[static_cast<std::size_t>(i - 1)] : 0.0;
      const double den = diag - sub * prev_c;
      denom_[static_cast<std::size_t>(i)] = den;
      const double super = i < n - 1 ? -dt * down[static_cast<std::size_t>(i)] : 0.0;
      prev_c = super / den;
      cprime_[static_cast<std::size_t>(i)] = prev_c;
    }
  }

  void solve(const std::vector<double>& rhs, std::vector<double>& x) const {
    const int n = gen_.n_cells();
    const auto& up = gen_.up_rates();
    x.resize(static_cast<std::size_t>(n));
    double prev_d = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sub = i > 0 ? -dt_ * up[static_cast<std::size_t>(i - 1)] : 0.0;
      prev_d = (rhs[static_cast<std::size_t>(i)] - sub * prev_d) / denom_[static_cast<std::size_t>(i)];
      x[static_cast<std::size_t>(i)] = prev_d;
    }
    for (int i = n - 2; i >= 0; --i)
      x[static_cast<std::size_t>(i)] -=
          cprime_[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i + 1)];
  }

 private:
  const FpeGenerator& gen_;
  double dt_ = 0.0;
  std::vector<double> cprime_, denom_;
};

inline double l1_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

inline double l1_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

/// Adaptive backward Euler with step doubling. Backward Euler steps through
/// (I - dt G)^{-1} are positivity preserving and conserve the column-sum
/// structure exactly, so mass errors stay at roundoff.
inline std::vector<double> evolve_values(const FpeGenerator& gen, std::vector<double> p, double t,
                                         const EvolveOptions& opts) {
  if (t == 0.0) return p;
  require(t > 0.0, errc::stiffness_failure, "evolution time must be nonnegative");
  BackwardEulerSolver solver(gen);
  const double rate = gen.max_rate();
  double dt = std::min(t, rate > 0.0 ? 0.5 / rate : t);
  double remaining = t;
  std::vector<double> full(p.size()), half(p.size()), half2(p.size());
  std::size_t steps = 0;
  while (remaining > 1e-15 * t) {
    dt = std::min(dt, remaining);
    solver.factor(dt);
    solver.solve(p, full);
    solver.factor(0.5 * dt);
    solver.solve(p, half);
    solver.solve(half, half2);
    const double err = l1_diff(full, half2);
    const double scale = std::max(opts.abs_tol, opts.rel_tol * std::max(1.0, l1_norm(p)));
    const double tol_step = scale * dt / t;
    if (err <= tol_step || dt <= 1e-14 * t) {
      p.swap(half2);
      remaining -= dt;
    }
    const double grow = err > 0.0 ? 0.9 * std::sqrt(tol_step / err) : 4.0;
    dt *= std::clamp(grow, 0.25, 4.0);
    if (++steps > opts.max_steps)
      fail(errc::stiffness_failure, "step control exhausted after " + std::to_string(steps) +
                                        " steps");
  }
  return p;
}

}  // namespace detail

/// Solves dp/dt = G p for the given duration.
inline PdfGrid evolve_pdf(const FpeGenerator& gen, PdfGrid p0, double t,
                          const EvolveOptions& opts = {}) {
  require(t >= 0.0, errc::stiffness_failure, "evolution time must be nonnegative");
  p0.values = detail::evolve_values(gen, std::move(p0.values), t, opts);
  return p0;
}

/// Fundamental solution at grid resolution: evolves the discrete delta.
inline PdfGrid conditional_pdf(const FpeGenerator& gen, double phi0, double t,
                               const EvolveOptions& opts = {}) {
  PdfGrid p = PdfGrid::delta(gen.geometry(), phi0);
  return evolve_pdf(gen, std::move(p), t, opts);
}

/// Normalized null vector of the generator. The stationary state of the
/// zero-flux chain has zero flux through every face, which gives the cell
/// ratios directly; accumulated in log space to avoid overflow.
inline PdfGrid stationary_pdf(const FpeGenerator& gen) {
  const int n = gen.n_cells();
  const auto& up = gen.up_rates();
  const auto& down = gen.down_rates();
  int components = 1;
  int lo = 0, hi = n - 1;
  for (int f = 0; f < n - 1; ++f) {
    const double u = up[static_cast<std::size_t>(f)];
    const double d = down[static_cast<std::size_t>(f)];
    if (u == 0.0 && d == 0.0) ++components;
    if (u > 0.0 && d == 0.0) lo = std::max(lo, f + 1);   // one-way up: no mass below
    if (u == 0.0 && d > 0.0) hi = std::min(hi, f);       // one-way down: no mass above
  }
  require(components == 1, errc::degenerate_null_space,
          "generator splits into " + std::to_string(components) + " disconnected blocks");
  require(lo <= hi, errc::degenerate_null_space,
          "opposed one-way faces leave no connected stationary support");
  std::vector<double> logp(static_cast<std::size_t>(n),
                           -std::numeric_limits<double>::infinity());
  logp[static_cast<std::size_t>(lo)] = 0.0;
  for (int i = lo; i < hi; ++i) {
    const double u = up[static_cast<std::size_t>(i)];
    const double d = down[static_cast<std::size_t>(i)];
    logp[static_cast<std::size_t>(i + 1)] =
        logp[static_cast<std::size_t>(i)] + std::log(u) - std::log(d);
  }
  double m = -std::numeric_limits<double>::infinity();
  for (int i = lo; i <= hi; ++i) m = std::max(m, logp[static_cast<std::size_t>(i)]);
  PdfGrid p;
  p.geom = gen.geometry();
  p.values.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = lo; i <= hi; ++i)
    p.values[static_cast<std::size_t>(i)] = std::exp(logp[static_cast<std::size_t>(i)] - m);
  p.normalize();
  return p;
}

/// Multi-time Green function by Markov chaining: evolve to the earliest time,
/// weight by phi^k, evolve to the next time, weight, and so on; the final
/// grid sum is the moment function value.
inline double green_function_chain(const FpeGenerator& gen, PdfGrid p0,
                                   const std::vector<double>& times_desc,
                                   const std::vector<int>& powers,
                                   const EvolveOptions& opts = {}) {
  require(!times_desc.empty(), errc::times_out_of_range, "need at least one time");
  require(times_desc.size() <= 3, errc::too_many_times, "at most 3 times supported");
  require(times_desc.size() == powers.size(), errc::too_many_times,
          "times and powers must have equal length");
  for (std::size_t i = 1; i < times_desc.size(); ++i)
    require(times_desc[i] < times_desc[i - 1], errc::non_descending_times,
            "times must strictly descend");
  require(times_desc.back() >= 0.0, errc::times_out_of_range, "times must be nonnegative");
  const PdfGeometry& geom = gen.geometry();
  std::vector<double> state = std::move(p0.values);
  double t_prev = 0.0;
  for (std::size_t j = times_desc.size(); j-- > 0;) {
    state = detail::evolve_values(gen, std::move(state), times_desc[j] - t_prev, opts);
    t_prev = times_desc[j];
    const int k = powers[j];
    if (k != 0)
      for (int i = 0; i < geom.n_cells; ++i)
        state[static_cast<std::size_t>(i)] *= std::pow(geom.center(i), k);
  }
  double g = 0.0;
  for (double v : state) g += v;
  return g * geom.dphi();
}

}  // namespace stoclab
