#pragma once

#include <cstddef>
#include <vector>

#include "stoclab/common.hpp"

namespace stoclab {

/// Uniform time grid with steps+1 points, t0 and tf included exactly.
struct TimeGrid {
  double t0 = 0.0;
  double tf = 1.0;
  std::size_t steps = 1;
  std::vector<double> points;

  double dt() const { return (tf - t0) / static_cast<double>(steps); }
  std::size_t size() const { return points.size(); }
};

inline TimeGrid make_time_grid(double t0, double tf, std::size_t steps) {
  require(tf > t0, errc::empty_interval, "time grid needs tf > t0");
  require(steps >= 1, errc::empty_interval, "time grid needs at least one step");
  TimeGrid g;
  g.t0 = t0;
  g.tf = tf;
  g.steps = steps;
  g.points.resize(steps + 1);
  const double dt = (tf - t0) / static_cast<double>(steps);
  for (std::size_t i = 0; i <= steps; ++i) g.points[i] = t0 + static_cast<double>(i) * dt;
  g.points[steps] = tf;
  return g;
}

}  // namespace stoclab
