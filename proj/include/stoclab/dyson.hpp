#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "stoclab/common.hpp"
#include "stoclab/fock.hpp"
#include "stoclab/master.hpp"

namespace stoclab {

/// Interaction-picture propagator with the equal-time convention theta(0)=0:
/// exactly zero for t <= t', exponential relaxation above.
struct Propagator {
  double rate = 1.0;

  double operator()(double t, double t_prime) const {
    return t > t_prime ? std::exp(-rate * (t - t_prime)) : 0.0;
  }
};

inline double propagator_eval(const Propagator& p, double t, double t_prime) {
  return p(t, t_prime);
}

/// L = l0 + coupling * l_int. The free part must generate a contraction
/// semigroup (all eigenvalue real parts <= 0).
struct SplitLiouvillian {
  Eigen::MatrixXd l0;
  Eigen::MatrixXd l_int;
  double coupling = 1.0;
  int truncation = 0;

  Eigen::MatrixXd full() const { return l0 + coupling * l_int; }
};

/// Splits against the relaxation part: L0 = -rate * diag(n), L_I = L - L0.
inline SplitLiouvillian split_liouvillian(const Liouvillian& l, double relax_rate) {
  require(relax_rate > 0.0, errc::no_linear_part,
          "no linear relaxation rate available; supply an explicit positive rate");
  SplitLiouvillian s;
  s.truncation = l.truncation;
  const int dim = l.dim();
  s.l0 = Eigen::MatrixXd::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) s.l0(n, n) = -relax_rate * static_cast<double>(n);
  s.l_int = l.matrix - s.l0;
  s.coupling = 1.0;
  return s;
}

/// Convenience split for specs built from the birth/death/damping preset; the
/// death rate supplies the free relaxation.
inline SplitLiouvillian split_liouvillian(const MasterSpec& spec, int n_trunc) {
  require(spec.verhulst.has_value() && spec.verhulst->beta > 0.0, errc::no_linear_part,
          "spec has no positive linear death rate to relax against");
  return split_liouvillian(build_liouvillian_doi(spec, n_trunc), spec.verhulst->beta);
}

enum class SimplexRule {
  open,    // strictly ordered interior nodes; equal-time tuples never contribute
  closed,  // equal-index tuples included with their simplex volume fraction
};

struct DysonOptions {
  int resolution = 64;       // panels per time dimension at the first pass
  int max_refinements = 8;   // doublings allowed before giving up
  double tol = 1e-9;         // Frobenius tolerance on the refinement delta
  SimplexRule rule = SimplexRule::open;
  bool extrapolate = true;   // Richardson-combine the last two resolutions
  bool adaptive = true;      // refine until tol; otherwise single pass
};

namespace detail {

/// One pass of the composite midpoint rule on the ordered simplex
/// 0 < u_k < ... < u_1 < t for all orders 0..k_max at once. Midpoint nodes
/// u_i = (i + 1/2) h are strictly interior; under the open rule only strictly
/// decreasing node tuples contribute, so coincident-time evaluations are
/// structurally absent. The closed rule adds equal-node tuples weighted by
/// their 1/r! simplex volume fraction.
///
/// Recursion over panels j with P_m = m-fold ordered integral carried to the
/// current node:
///   P_m(j+1) = e^{L0 h} [ P_m(j) + h g L_I P_{m-1}(j) ]      (open)
/// with the final half-panel propagation appended at the end. The right
/// operand X0 lets the same pass produce term matrices (X0 = I) or their
/// action on a state (X0 = P0).
inline std::vector<Eigen::MatrixXd> dyson_pass(const SplitLiouvillian& split, int k_max, double t,
                                               int panels, SimplexRule rule,
                                               const Eigen::MatrixXd& x0) {
  const double h = t / panels;
  const Eigen::MatrixXd step = (split.l0 * h).exp();
  const Eigen::MatrixXd half = (split.l0 * (0.5 * h)).exp();
  const Eigen::MatrixXd lint = split.coupling * split.l_int;
  std::vector<Eigen::MatrixXd> p(static_cast<std::size_t>(k_max) + 1);
  p[0] = half * x0;  // value at the first midpoint
  for (int m = 1; m <= k_max; ++m)
    p[static_cast<std::size_t>(m)] = Eigen::MatrixXd::Zero(x0.rows(), x0.cols());
  std::vector<Eigen::MatrixXd> fresh(static_cast<std::size_t>(k_max) + 1);
  for (int j = 0; j + 1 < panels; ++j) {
    for (int m = k_max; m >= 1; --m) {
      fresh[static_cast<std::size_t>(m)] =
          p[static_cast<std::size_t>(m)] + h * (lint * p[static_cast<std::size_t>(m - 1)]);
      if (rule == SimplexRule::closed) {
        // r-fold coincident insertions at this node carry weight h^r / r!
        double w = h;
        for (int r = 2; r <= m; ++r) {
          w *= h / r;
          Eigen::MatrixXd power = p[static_cast<std::size_t>(m - r)];
          for (int q = 0; q < r; ++q) power = lint * power;
          fresh[static_cast<std::size_t>(m)] += w * power;
        }
      }
      p[static_cast<std::size_t>(m)] = step * fresh[static_cast<std::size_t>(m)];
    }
    p[0] = step * p[0];
  }
  // final node -> t is half a panel
  for (int m = k_max; m >= 1; --m) {
    Eigen::MatrixXd tail = p[static_cast<std::size_t>(m)] + h * (lint * p[static_cast<std::size_t>(m - 1)]);
    if (rule == SimplexRule::closed) {
      double w = h;
      for (int r = 2; r <= m; ++r) {
        w *= h / r;
        Eigen::MatrixXd power = p[static_cast<std::size_t>(m - r)];
        for (int q = 0; q < r; ++q) power = lint * power;
        tail += w * power;
      }
    }
    p[static_cast<std::size_t>(m)] = half * tail;
  }
  p[0] = half * p[0];
  return p;
}

inline std::vector<Eigen::MatrixXd> dyson_terms_impl(const SplitLiouvillian& split, int k_max,
                                                     double t, const DysonOptions& opts,
                                                     const Eigen::MatrixXd& x0) {
  require(k_max >= 0 && k_max <= 4, errc::too_many_times,
          "perturbative order must be between 0 and 4");
  if (t == 0.0) {
    std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(k_max) + 1,
                                     Eigen::MatrixXd::Zero(x0.rows(), x0.cols()));
    out[0] = x0;
    return out;
  }
  int panels = std::max(2, opts.resolution);
  auto coarse = dyson_pass(split, k_max, t, panels, opts.rule, x0);
  if (!opts.adaptive && !opts.extrapolate) return coarse;
  for (int refinement = 0; refinement <= opts.max_refinements; ++refinement) {
    auto fine = dyson_pass(split, k_max, t, 2 * panels, opts.rule, x0);
    double delta = 0.0;
    for (int m = 0; m <= k_max; ++m)
      delta = std::max(delta, (fine[static_cast<std::size_t>(m)] -
                               coarse[static_cast<std::size_t>(m)])
                                  .norm());
    const bool converged = delta <= opts.tol;
    if (converged || !opts.adaptive || refinement == opts.max_refinements) {
      if (!converged && opts.adaptive)
        fail(errc::quadrature_not_converged,
             "simplex quadrature delta " + std::to_string(delta) + " above tolerance at " +
                 std::to_string(2 * panels) + " panels");
      if (!opts.extrapolate) return fine;
      // Leading quadrature error: O(h) from the dropped (or rearranged)
      // diagonal cells for orders >= 2, O(h^2) midpoint error at order <= 1.
      std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(k_max) + 1);
      for (int m = 0; m <= k_max; ++m) {
        if (m <= 1)
          out[static_cast<std::size_t>(m)] = (4.0 * fine[static_cast<std::size_t>(m)] -
                                              coarse[static_cast<std::size_t>(m)]) /
                                             3.0;
        else
          out[static_cast<std::size_t>(m)] =
              2.0 * fine[static_cast<std::size_t>(m)] - coarse[static_cast<std::size_t>(m)];
      }
      return out;
    }
    coarse = std::move(fine);
    panels *= 2;
  }
  fail(errc::quadrature_not_converged, "refinement budget exhausted");
}

}  // namespace detail

/// All chronological-exponential terms T_0..T_kmax as matrices.
inline std::vector<Eigen::MatrixXd> dyson_terms(const SplitLiouvillian& split, int k_max, double t,
                                                const DysonOptions& opts = {}) {
  const int dim = split.truncation + 1;
  return detail::dyson_terms_impl(split, k_max, t, opts, Eigen::MatrixXd::Identity(dim, dim));
}

/// The k-th term alone (k = 0 is the free evolution exp(L0 t)).
inline Eigen::MatrixXd dyson_term(const SplitLiouvillian& split, int order, double t,
                                  const DysonOptions& opts = {}) {
  return dyson_terms(split, order, t, opts)[static_cast<std::size_t>(order)];
}

enum class DysonRep {
  unshifted,  // projection row of ones, observable a+ a
  shifted,    // projection row e_0, observable (a+ + 1) a, binomial initial state
};

struct DysonMomentSeries {
  double t = 0.0;
  DysonRep rep = DysonRep::shifted;
  std::vector<double> per_order_mean;  // partial sums through each order
  double exact_reference = 0.0;        // mean from the full Liouvillian
};

/// Mean occupation per truncation order of the perturbation series around the
/// linear-relaxation free part. The shifted representation keeps the free
/// part -beta diag(n) and moves all shift residue into the interaction, so
/// for birthless specs the interaction carries the damping coupling alone.
inline DysonMomentSeries dyson_moment_series(const MasterSpec& spec, int n_trunc, int n0,
                                             int max_order, double t,
                                             DysonRep rep = DysonRep::shifted,
                                             const DysonOptions& opts = {}) {
  require(spec.verhulst.has_value() && spec.verhulst->beta > 0.0, errc::no_linear_part,
          "spec has no positive linear death rate to relax against");
  const double beta = spec.verhulst->beta;
  DysonMomentSeries out;
  out.t = t;
  out.rep = rep;
  const Liouvillian exact_l = build_liouvillian_doi(spec, n_trunc);
  out.exact_reference =
      projection_expectation(evolve_state(exact_l, basis_state(n_trunc, n0), t), 1);
  if (rep == DysonRep::unshifted) {
    const SplitLiouvillian split = split_liouvillian(exact_l, beta);
    const auto terms =
        detail::dyson_terms_impl(split, max_order, t, opts, basis_state(n_trunc, n0));
    Eigen::VectorXd partial = Eigen::VectorXd::Zero(n_trunc + 1);
    for (int k = 0; k <= max_order; ++k) {
      partial += terms[static_cast<std::size_t>(k)].col(0);
      double mean = 0.0;
      for (int n = 0; n <= n_trunc; ++n) mean += static_cast<double>(n) * partial(n);
      out.per_order_mean.push_back(mean);
    }
  } else {
    const ShiftedRepresentation shifted = doi_shift(spec, n_trunc);
    const SplitLiouvillian split = split_liouvillian(shifted.liouvillian, beta);
    const Eigen::VectorXd p0 = shifted.shift_state(basis_state(n_trunc, n0));
    const auto terms = detail::dyson_terms_impl(split, max_order, t, opts, p0);
    Eigen::VectorXd partial = Eigen::VectorXd::Zero(n_trunc + 1);
    for (int k = 0; k <= max_order; ++k) {
      partial += terms[static_cast<std::size_t>(k)].col(0);
      out.per_order_mean.push_back((shifted.observable * partial)(0));
    }
  }
  return out;
}

}  // namespace stoclab
