#pragma once

#include <stdexcept>
#include <string>

namespace stoclab {

inline constexpr const char* kVersion = "0.1.0";

/// Error identifiers raised by the library. Names follow the artifact's
/// documented error vocabulary so callers can dispatch on code().
enum class errc {
  // model validation
  non_positive_k,
  negative_d,
  degree_too_high,
  negative_rate,
  escape_below_zero,
  empty_interval,
  // sde
  wrong_interpretation,
  too_few_samples,
  times_out_of_range,
  // fpe
  grid_too_coarse,
  non_positive_width,
  stiffness_failure,
  out_of_grid,
  degenerate_null_space,
  // shared multi-time preconditions
  too_many_times,
  non_descending_times,
  // fock space
  truncation_too_small,
  // perturbation series
  no_linear_part,
  quadrature_not_converged,
  // rate equations
  non_positive_tau,
  dimension_not_renormalized,
  step_not_converged,
  // cli / io
  config_parse_error,
  unknown_subcommand,
  model_invalid,
  grid_mismatch,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::non_positive_k: return "NonPositiveK";
    case errc::negative_d: return "NegativeD";
    case errc::degree_too_high: return "DegreeTooHigh";
    case errc::negative_rate: return "NegativeRate";
    case errc::escape_below_zero: return "EscapeBelowZero";
    case errc::empty_interval: return "EmptyInterval";
    case errc::wrong_interpretation: return "WrongInterpretation";
    case errc::too_few_samples: return "TooFewSamples";
    case errc::times_out_of_range: return "TimesOutOfRange";
    case errc::grid_too_coarse: return "GridTooCoarse";
    case errc::non_positive_width: return "NonPositiveWidth";
    case errc::stiffness_failure: return "StiffnessFailure";
    case errc::out_of_grid: return "OutOfGrid";
    case errc::degenerate_null_space: return "DegenerateNullSpace";
    case errc::too_many_times: return "TooManyTimes";
    case errc::non_descending_times: return "NonDescendingTimes";
    case errc::truncation_too_small: return "TruncationTooSmall";
    case errc::no_linear_part: return "NoLinearPart";
    case errc::quadrature_not_converged: return "QuadratureNotConverged";
    case errc::non_positive_tau: return "NonPositiveTau";
    case errc::dimension_not_renormalized: return "DimensionNotRenormalized";
    case errc::step_not_converged: return "StepNotConverged";
    case errc::config_parse_error: return "ConfigParseError";
    case errc::unknown_subcommand: return "UnknownSubcommand";
    case errc::model_invalid: return "ModelInvalid";
    case errc::grid_mismatch: return "GridMismatch";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool ok, errc code, const std::string& msg) {
  if (!ok) fail(code, msg);
}

}  // namespace stoclab
