#pragma once

#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "stoclab/common.hpp"
#include "stoclab/detail/ode.hpp"
#include "stoclab/master.hpp"
#include "stoclab/polynomial.hpp"

namespace stoclab {

// State vectors live in coefficient space: the array P(n) of
// |P> = sum_n P(n) |n> with <n|m> = n! delta_nm. In this representation the
// annihilation operator acts as (a P)(n) = (n+1) P(n+1), creation as
// (a+ P)(n) = P(n-1), the projection row <P| is all ones and P(n) is directly
// the occupation probability. The factorial inner product never appears.

struct LadderOperators {
  Eigen::MatrixXd a;      // (a P)(n) = (n+1) P(n+1)
  Eigen::MatrixXd a_dag;  // (a+ P)(n) = P(n-1); amplitude of the top state is dropped
};

inline LadderOperators build_ladder_operators(int n_trunc) {
  require(n_trunc >= 1, errc::truncation_too_small, "need at least two states");
  const int dim = n_trunc + 1;
  LadderOperators ops;
  ops.a = Eigen::MatrixXd::Zero(dim, dim);
  ops.a_dag = Eigen::MatrixXd::Zero(dim, dim);
  for (int n = 0; n < n_trunc; ++n) {
    ops.a(n, n + 1) = static_cast<double>(n + 1);
    ops.a_dag(n + 1, n) = 1.0;
  }
  return ops;
}

enum class LiouvillianSource { doi, direct, shifted };

struct Liouvillian {
  Eigen::MatrixXd matrix;
  int truncation = 0;
  LiouvillianSource source = LiouvillianSource::doi;

  int dim() const { return truncation + 1; }
};

namespace detail {

/// Stirling numbers of the second kind S(k, j) for k, j <= max_k: converts
/// monomials to the falling-factorial basis, n^k = sum_j S(k,j) n^(j).
inline std::vector<std::vector<double>> stirling_second(int max_k) {
  std::vector<std::vector<double>> s(max_k + 1, std::vector<double>(max_k + 1, 0.0));
  s[0][0] = 1.0;
  for (int k = 1; k <= max_k; ++k)
    for (int j = 1; j <= k; ++j)
      s[k][j] = s[k - 1][j - 1] + static_cast<double>(j) * s[k - 1][j];
  return s;
}

/// Coefficients c_j of r(n) = sum_j c_j n^(j) (falling-factorial basis).
inline std::vector<double> falling_factorial_coeffs(const Polynomial& r) {
  const int deg = r.degree();
  const auto stirling = stirling_second(deg);
  std::vector<double> c(static_cast<std::size_t>(deg) + 1, 0.0);
  for (int k = 0; k <= deg; ++k)
    for (int j = 0; j <= k; ++j) c[static_cast<std::size_t>(j)] += r.coeff(k) * stirling[k][j];
  return c;
}

inline Eigen::MatrixXd matrix_power_of(const Eigen::MatrixXd& m, int p) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(m.rows(), m.cols());
  for (int i = 0; i < p; ++i) r = r * m;
  return r;
}

/// Assembles the channel operator (jump - loss) as a polynomial in the given
/// ladder matrices. Passing shifted ladders (a+ -> a+ + 1) yields the shifted
/// representation of the same channel.
inline Eigen::MatrixXd channel_operator(const LadderOperators& ops, const ReactionChannel& ch) {
  const auto dim = ops.a.rows();
  const auto c = falling_factorial_coeffs(ch.rate_poly);
  const Eigen::MatrixXd number_op = ops.a_dag * ops.a;
  // loss: r evaluated at the (possibly shifted) number operator, normal order
  Eigen::MatrixXd loss = Eigen::MatrixXd::Zero(dim, dim);
  {
    Eigen::MatrixXd ff = Eigen::MatrixXd::Identity(dim, dim);  // (a+)^j a^j accumulator
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (j > 0) ff = ops.a_dag * ff * ops.a;
      if (c[j] != 0.0) loss += c[j] * ff;
    }
  }
  Eigen::MatrixXd jump;
  if (ch.delta > 0) {
    jump = matrix_power_of(ops.a_dag, ch.delta) * loss;
  } else if (ch.delta < 0) {
    const int m = -ch.delta;
    // no-escape invariant makes c_j vanish for j < m; the remainder factors
    // through a^m with g(n) = r(n + m) / (n + m)^(m) carried on the left:
    //   jump = g(n_op) a^m,  g in falling factorials: d_i = c_{i+m}
    for (int j = 0; j < m && j < static_cast<int>(c.size()); ++j)
      require(c[static_cast<std::size_t>(j)] == 0.0, errc::escape_below_zero,
              "channel rate does not vanish below the jump reach");
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd ff = Eigen::MatrixXd::Identity(dim, dim);
    for (std::size_t i = 0; i + static_cast<std::size_t>(m) < c.size(); ++i) {
      if (i > 0) ff = ops.a_dag * ff * ops.a;
      if (c[i + static_cast<std::size_t>(m)] != 0.0) g += c[i + static_cast<std::size_t>(m)] * ff;
    }
    jump = g * matrix_power_of(ops.a, m);
  } else {
    jump = loss;
  }
  return jump - loss;
}

}  // namespace detail

/// Liouvillian assembled from ladder-operator products per channel.
inline Liouvillian build_liouvillian_doi(const MasterSpec& spec, int n_trunc) {
  require(n_trunc >= std::max(1, spec.max_abs_delta()), errc::truncation_too_small,
          "truncation smaller than the largest channel jump");
  const LadderOperators ops = build_ladder_operators(n_trunc);
  const int dim = n_trunc + 1;
  Liouvillian l;
  l.truncation = n_trunc;
  l.source = LiouvillianSource::doi;
  l.matrix = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& ch : spec.channels) l.matrix += detail::channel_operator(ops, ch);
  return l;
}

/// Gain/loss bookkeeping straight from the master equation: column n gains
/// rate(n) at row n+delta (dropped when out of range) and loses rate(n) on
/// the diagonal.
inline Liouvillian build_generator_direct(const MasterSpec& spec, int n_trunc) {
  require(n_trunc >= 1, errc::truncation_too_small, "need at least two states");
  const int dim = n_trunc + 1;
  Liouvillian l;
  l.truncation = n_trunc;
  l.source = LiouvillianSource::direct;
  l.matrix = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& ch : spec.channels) {
    for (int n = 0; n <= n_trunc; ++n) {
      const double r = ch.rate(n);
      if (r == 0.0) continue;
      const int target = n + ch.delta;
      if (target >= 0 && target <= n_trunc) l.matrix(target, n) += r;
      l.matrix(n, n) -= r;
    }
  }
  return l;
}

struct FockEvolveOptions {
  int pade_threshold = 64;  // use dense Pade expm up to this truncation
  detail::Rk45Options ode;
};

/// e^{L t} P0 by dense Pade exponential at small truncation or adaptive RK45
/// integration above the threshold.
inline Eigen::VectorXd evolve_state(const Liouvillian& l, const Eigen::VectorXd& p0, double t,
                                    const FockEvolveOptions& opts = {}) {
  require(t >= 0.0, errc::stiffness_failure, "evolution time must be nonnegative");
  if (t == 0.0) return p0;
  if (l.truncation <= opts.pade_threshold) {
    Eigen::MatrixXd lt = l.matrix * t;
    return lt.exp() * p0;
  }
  return detail::rk45_integrate(
      [&l](const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy.noalias() = l.matrix * y; }, p0, t,
      opts.ode);
}

/// <P| (a+ a)^k |state> = sum_n n^k P(n): the projection row is all ones in
/// coefficient space and the number operator is diagonal.
inline double projection_expectation(const Eigen::VectorXd& state, int k) {
  double s = 0.0;
  for (int n = 0; n < state.size(); ++n) s += std::pow(static_cast<double>(n), k) * state(n);
  return s;
}

inline double state_mass(const Eigen::VectorXd& state) {
  return projection_expectation(state, 0);
}

/// P(n, t | n0, 0): component n of the evolved coefficient vector; the 1/n!
/// of the matrix-element form is absorbed by the coefficient convention.
inline double conditional_prob(const Liouvillian& l, int n0, int n, double t,
                               const FockEvolveOptions& opts = {}) {
  require(n0 >= 0 && n0 <= l.truncation, errc::out_of_grid, "n0 outside truncated space");
  require(n >= 0 && n <= l.truncation, errc::out_of_grid, "n outside truncated space");
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(l.dim());
  e0(n0) = 1.0;
  return evolve_state(l, e0, t, opts)(n);
}

/// G_m = <P| n e^{L(t1-t2)} n ... n e^{L tm} |P0> for strictly descending
/// times, evaluated right to left; the number insertions are diagonal.
inline double green_function_operator(const Liouvillian& l, Eigen::VectorXd p0,
                                      const std::vector<double>& times_desc,
                                      const FockEvolveOptions& opts = {}) {
  require(!times_desc.empty(), errc::times_out_of_range, "need at least one time");
  require(times_desc.size() <= 3, errc::too_many_times, "at most 3 times supported");
  for (std::size_t i = 1; i < times_desc.size(); ++i)
    require(times_desc[i] < times_desc[i - 1], errc::non_descending_times,
            "times must strictly descend");
  require(times_desc.back() >= 0.0, errc::times_out_of_range, "times must be nonnegative");
  double t_prev = 0.0;
  for (std::size_t j = times_desc.size(); j-- > 0;) {
    p0 = evolve_state(l, p0, times_desc[j] - t_prev, opts);
    t_prev = times_desc[j];
    for (int n = 0; n < p0.size(); ++n) p0(n) *= static_cast<double>(n);
  }
  return p0.sum();
}

/// e^a as a matrix on coefficient space: (e^a P)(n) = sum_k C(n+k, k) P(n+k).
/// Applying it to an initial state realizes |P0'> = sum_n P(0,n) (a+ + 1)^n |0>.
inline Eigen::MatrixXd binomial_transform_matrix(int n_trunc) {
  const int dim = n_trunc + 1;
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(dim, dim);
  for (int j = 0; j < dim; ++j) {
    e(0, j) = 1.0;
    for (int i = 1; i <= j; ++i)
      e(i, j) = e(i - 1, j) * static_cast<double>(j - i + 1) / static_cast<double>(i);
  }
  return e;
}

/// Shifted representation: creation operators replaced by a+ + 1, the
/// projection row collapses to <0| and occupation is measured by (a+ + 1) a.
struct ShiftedRepresentation {
  Liouvillian liouvillian;
  Eigen::MatrixXd observable;  // (a+ + 1) a
  int truncation = 0;

  Eigen::VectorXd shift_state(const Eigen::VectorXd& p0) const {
    return binomial_transform_matrix(truncation) * p0;
  }

  /// <0| observable^k e^{L t} |shifted state>.
  double moment(const Eigen::VectorXd& shifted_state, int k) const {
    Eigen::VectorXd v = shifted_state;
    for (int i = 0; i < k; ++i) v = observable * v;
    return v(0);
  }
};

inline ShiftedRepresentation doi_shift(const MasterSpec& spec, int n_trunc) {
  require(n_trunc >= std::max(1, spec.max_abs_delta()), errc::truncation_too_small,
          "truncation smaller than the largest channel jump");
  LadderOperators ops = build_ladder_operators(n_trunc);
  LadderOperators shifted = ops;
  shifted.a_dag += Eigen::MatrixXd::Identity(ops.a.rows(), ops.a.cols());
  ShiftedRepresentation rep;
  rep.truncation = n_trunc;
  rep.liouvillian.truncation = n_trunc;
  rep.liouvillian.source = LiouvillianSource::shifted;
  rep.liouvillian.matrix = Eigen::MatrixXd::Zero(n_trunc + 1, n_trunc + 1);
  for (const auto& ch : spec.channels)
    rep.liouvillian.matrix += detail::channel_operator(shifted, ch);
  rep.observable = shifted.a_dag * ops.a;
  return rep;
}

/// 1 - sum_n P(t, n): probability mass lost through the truncation boundary,
/// the validity certificate for a chosen cutoff.
inline double truncation_leak(const Liouvillian& l, const Eigen::VectorXd& p0, double t,
                              const FockEvolveOptions& opts = {}) {
  return 1.0 - state_mass(evolve_state(l, p0, t, opts));
}

inline Eigen::VectorXd basis_state(int n_trunc, int n0) {
  require(n0 >= 0 && n0 <= n_trunc, errc::out_of_grid, "n0 outside truncated space");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n_trunc + 1);
  v(n0) = 1.0;
  return v;
}

inline Eigen::VectorXd poisson_state(double mu, int n_trunc) {
  Eigen::VectorXd v(n_trunc + 1);
  double p = std::exp(-mu);
  for (int n = 0; n <= n_trunc; ++n) {
    v(n) = p;
    p *= mu / static_cast<double>(n + 1);
  }
  return v;
}

inline std::vector<std::tuple<int, int, double>> matrix_triplets(const Eigen::MatrixXd& m) {
  std::vector<std::tuple<int, int, double>> t;
  for (int j = 0; j < m.cols(); ++j)
    for (int i = 0; i < m.rows(); ++i)
      if (m(i, j) != 0.0) t.emplace_back(i, j, m(i, j));
  return t;
}

}  // namespace stoclab
