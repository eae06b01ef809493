#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>

#include <Eigen/Dense>

#include "stoclab/common.hpp"

namespace stoclab::detail {

struct Rk45Options {
  double rel_tol = 1e-10;
  double abs_tol = 1e-13;
  std::size_t max_steps = 50'000'000;
};

/// Dormand-Prince RK45 for y' = f(y), integrating over [0, t].
inline Eigen::VectorXd rk45_integrate(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& f, Eigen::VectorXd y,
    double t, const Rk45Options& opts = {}) {
  if (t == 0.0) return y;
  const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  (void)c2; (void)c3; (void)c4; (void)c5;  // autonomous system
  Eigen::VectorXd k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()), k5(y.size()),
      k6(y.size()), k7(y.size()), ytmp(y.size()), y5(y.size()), y4(y.size());
  f(y, k1);
  double dt = t;
  {
    const double n1 = k1.norm();
    if (n1 > 0.0) dt = std::min(t, 0.1 * std::max(1.0, y.norm()) / n1);
  }
  double remaining = t;
  std::size_t steps = 0;
  while (remaining > 1e-15 * t) {
    dt = std::min(dt, remaining);
    ytmp = y + dt * (1.0 / 5) * k1;
    f(ytmp, k2);
    ytmp = y + dt * ((3.0 / 40) * k1 + (9.0 / 40) * k2);
    f(ytmp, k3);
    ytmp = y + dt * ((44.0 / 45) * k1 + (-56.0 / 15) * k2 + (32.0 / 9) * k3);
    f(ytmp, k4);
    ytmp = y + dt * ((19372.0 / 6561) * k1 + (-25360.0 / 2187) * k2 + (64448.0 / 6561) * k3 +
                     (-212.0 / 729) * k4);
    f(ytmp, k5);
    ytmp = y + dt * ((9017.0 / 3168) * k1 + (-355.0 / 33) * k2 + (46732.0 / 5247) * k3 +
                     (49.0 / 176) * k4 + (-5103.0 / 18656) * k5);
    f(ytmp, k6);
    y5 = y + dt * ((35.0 / 384) * k1 + (500.0 / 1113) * k3 + (125.0 / 192) * k4 +
                   (-2187.0 / 6784) * k5 + (11.0 / 84) * k6);
    f(y5, k7);
    y4 = y + dt * ((5179.0 / 57600) * k1 + (7571.0 / 16695) * k3 + (393.0 / 640) * k4 +
                   (-92097.0 / 339200) * k5 + (187.0 / 2100) * k6 + (1.0 / 40) * k7);
    const double scale = opts.abs_tol + opts.rel_tol * std::max(y.norm(), y5.norm());
    const double err = (y5 - y4).norm() / scale;
    if (err <= 1.0 || dt <= 1e-14 * t) {
      y.swap(y5);
      k1.swap(k7);  // FSAL
      remaining -= dt;
    } else {
      f(y, k1);  // restore k1 for retry (y unchanged, but keep logic simple)
    }
    const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    dt *= std::clamp(grow, 0.2, 5.0);
    if (++steps > opts.max_steps) fail(errc::stiffness_failure, "RK45 step budget exhausted");
  }
  return y;
}

}  // namespace stoclab::detail
