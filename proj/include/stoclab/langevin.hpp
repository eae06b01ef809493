#pragma once

#include <string>

#include "stoclab/common.hpp"
#include "stoclab/polynomial.hpp"

namespace stoclab {

enum class Interpretation { Ito, Stratonovich };

inline const char* to_string(Interpretation i) {
  return i == Interpretation::Ito ? "ito" : "stratonovich";
}

inline constexpr int kMaxPolyDegree = 4;

/// dphi/dt = -K*phi + U(phi) + f * b(phi), with <f f'> = D * delta(t - t').
struct LangevinSpec {
  double k_relax = 1.0;                 // K, relaxation rate (> 0)
  Polynomial drift_poly;                // U(phi), nonlinear drift
  Polynomial noise_poly{1.0};           // b(phi), noise amplitude
  double noise_strength = 0.0;          // D (>= 0)
  Interpretation interpretation = Interpretation::Ito;

  double drift(double phi) const { return -k_relax * phi + drift_poly(phi); }
  double noise_amp(double phi) const { return noise_poly(phi); }
};

inline LangevinSpec validate_langevin_spec(LangevinSpec spec) {
  require(spec.k_relax > 0.0, errc::non_positive_k, "k_relax must be positive");
  require(spec.noise_strength >= 0.0, errc::negative_d, "noise_strength must be nonnegative");
  require(spec.drift_poly.degree() <= kMaxPolyDegree, errc::degree_too_high,
          "drift_poly degree exceeds " + std::to_string(kMaxPolyDegree));
  require(spec.noise_poly.degree() <= kMaxPolyDegree, errc::degree_too_high,
          "noise_poly degree exceeds " + std::to_string(kMaxPolyDegree));
  return spec;
}

}  // namespace stoclab
