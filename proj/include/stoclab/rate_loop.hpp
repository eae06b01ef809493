#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "stoclab/common.hpp"
#include "stoclab/time_grid.hpp"

namespace stoclab {

/// Pair annihilation A+A->0 at mean-field rate 2*lambda*D, with the loop
/// correction driven by the squared diffusion kernel in dimension dim.
struct RateModel {
  double lambda = 1.0;     // reaction coupling (enters as lambda * D)
  double diffusion = 1.0;  // D > 0
  int dim = 1;             // spatial dimension d >= 1
  double a0 = 1.0;         // initial density
};

inline RateModel validate_rate_model(RateModel m) {
  require(m.lambda >= 0.0, errc::model_invalid, "lambda must be nonnegative");
  require(m.diffusion > 0.0, errc::model_invalid, "diffusion constant must be positive");
  require(m.dim >= 1, errc::model_invalid, "dimension must be at least 1");
  require(m.a0 >= 0.0, errc::model_invalid, "initial density must be nonnegative");
  return m;
}

/// Closed-form homogeneous mean field a(t) = a0 / (1 + 2 lambda D a0 t).
inline std::vector<double> mean_field_solve(const RateModel& model, const TimeGrid& grid) {
  const double rate = 2.0 * model.lambda * model.diffusion;
  std::vector<double> a(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid.points[i] - grid.t0;
    a[i] = model.a0 / (1.0 + rate * model.a0 * t);
  }
  return a;
}

/// Spatial integral of the squared diffusion kernel:
/// int d^d r Delta(tau, r)^2 = (8 pi D tau)^(-d/2).
inline double loop_kernel(int dim, double diffusion, double tau) {
  require(tau > 0.0, errc::non_positive_tau, "kernel requires tau > 0");
  return std::pow(8.0 * 3.14159265358979323846 * diffusion * tau,
                  -0.5 * static_cast<double>(dim));
}

/// Whether the kernel singularity tau^(-d/2) is integrable at the origin.
inline bool loop_kernel_integrable(int dim) { return dim < 2; }

struct OneLoopOptions {
  double loop_scale = 1.0;   // multiplies the loop coefficient; 0 recovers mean field
  double fp_tol = 1e-10;     // fixed-point tolerance per step
  int max_fp_iters = 200;
};

/// Fluctuation-amended density in d = 1:
///   da/dt = -2 lambda D a^2
///           + 4 lambda^2 D^2 int_0^t (8 pi D (t-u))^{-1/2} a(u)^2 du.
/// Trapezoidal marching with the weakly singular kernel integrated exactly
/// against piecewise-linear a^2 (product integration); each step is closed by
/// fixed-point iteration. Dimensions d >= 2 are refused: the memory kernel is
/// not integrable at the origin and the equation requires a renormalized
/// treatment before it makes numerical sense.
inline std::vector<double> one_loop_solve(const RateModel& model_in, const TimeGrid& grid,
                                          const OneLoopOptions& opts = {}) {
  const RateModel model = validate_rate_model(model_in);
  require(model.dim == 1, errc::dimension_not_renormalized,
          "d = " + std::to_string(model.dim) +
              " requires a renormalized theory; only d = 1 is solvable as written");
  const double rate = 2.0 * model.lambda * model.diffusion;
  const double kappa = opts.loop_scale * 4.0 * model.lambda * model.lambda * model.diffusion *
                       model.diffusion /
                       std::sqrt(8.0 * 3.14159265358979323846 * model.diffusion);
  const std::size_t n = grid.size();
  const double dt = grid.dt();
  std::vector<double> a(n, model.a0);
  std::vector<double> y(n, model.a0 * model.a0);  // a^2 samples for the memory term
  std::vector<double> memory(n, 0.0);
  const double sqrt_dt = std::sqrt(dt);
  // product-integration weights for the last panel [t_{k}, t_{k+1}] against
  // s^{-1/2}: left node 2/3 sqrt(dt), right (singular) node 4/3 sqrt(dt)
  const double w_last_left = (2.0 / 3.0) * sqrt_dt;
  const double w_last_right = (4.0 / 3.0) * sqrt_dt;

  // int_0^{t_k} (t_k - u)^{-1/2} y(u) du with y piecewise linear, split into
  // the part fixed during the step and the weight on the unknown y_k
  auto memory_fixed_part = [&](std::size_t k) {
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < k; ++j) {
      const double s2 = static_cast<double>(k - j) * dt;      // t_k - t_j
      const double s1 = static_cast<double>(k - j - 1) * dt;  // t_k - t_{j+1}
      const double rs1 = std::sqrt(s1), rs2 = std::sqrt(s2);
      const double i_half = (2.0 / 3.0) * (s2 * rs2 - s1 * rs1);  // int s^{1/2}
      const double i_mhalf = 2.0 * (rs2 - rs1);                   // int s^{-1/2}
      const double w_left = (i_half - s1 * i_mhalf) / dt;   // basis peaking at t_j
      const double w_right = (s2 * i_mhalf - i_half) / dt;  // basis peaking at t_{j+1}
      acc += w_left * y[j] + w_right * y[j + 1];
    }
    acc += w_last_left * y[k - 1];
    return acc;
  };

  double f_prev = -rate * model.a0 * model.a0;  // memory vanishes at t0
  for (std::size_t k = 1; k < n; ++k) {
    const double mem_fixed = kappa != 0.0 ? memory_fixed_part(k) : 0.0;
    double a_next = a[k - 1];
    bool converged = false;
    double f_next = 0.0;
    for (int it = 0; it < opts.max_fp_iters; ++it) {
      const double y_next = a_next * a_next;
      f_next = -rate * y_next + kappa * (mem_fixed + w_last_right * y_next);
      const double candidate = a[k - 1] + 0.5 * dt * (f_prev + f_next);
      const double change = std::abs(candidate - a_next);
      a_next = candidate;
      if (change < opts.fp_tol * std::max(1.0, std::abs(a_next))) {
        converged = true;
        break;
      }
    }
    require(converged, errc::step_not_converged,
            "fixed point stalled at t = " + std::to_string(grid.points[k]));
    require(a_next > 0.0, errc::step_not_converged,
            "density lost positivity at t = " + std::to_string(grid.points[k]));
    a[k] = a_next;
    y[k] = a_next * a_next;
    memory[k] = kappa * (mem_fixed + w_last_right * y[k]);
    f_prev = -rate * y[k] + memory[k];
  }
  return a;
}

/// Deterministic logistic flow dn/dt = (lambda - beta) n - gamma n^2, closed
/// form on the grid.
inline std::vector<double> verhulst_mean_field(double beta, double lambda, double gamma, double n0,
                                               const TimeGrid& grid) {
  const double r = lambda - beta;
  std::vector<double> n(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid.points[i] - grid.t0;
    if (r == 0.0) {
      n[i] = n0 / (1.0 + gamma * n0 * t);
    } else {
      const double e = std::exp(r * t);
      n[i] = r * n0 * e / (r + gamma * n0 * (e - 1.0));
    }
  }
  return n;
}

}  // namespace stoclab
