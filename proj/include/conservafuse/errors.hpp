#pragma once

#include <stdexcept>
#include <string>

namespace conservafuse {

// Failure codes raised across the library. Validation codes mean the caller
// supplied bad input; degeneracy codes mean structurally valid input that is
// numerically unusable (singular factors, empty parameter domains).
enum class errc {
  not_symmetric,
  not_positive_semidefinite,
  not_positive_definite,
  dimension_mismatch,
  dimension_not_two,
  singular_matrix,
  singular_r,
  singular_covariance,
  omega_out_of_range,
  parameter_out_of_range,
  degenerate_split,
  degenerate_denominator,
  gain_constraint_violated,
  zero_vector,
  zero_direction,
  wrong_case,
  non_finite_cost,
  invalid_input,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::not_symmetric: return "NotSymmetric";
    case errc::not_positive_semidefinite: return "NotPositiveSemiDefinite";
    case errc::not_positive_definite: return "NotPositiveDefinite";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::dimension_not_two: return "DimensionNotTwo";
    case errc::singular_matrix: return "SingularMatrix";
    case errc::singular_r: return "SingularR";
    case errc::singular_covariance: return "SingularCovariance";
    case errc::omega_out_of_range: return "OmegaOutOfRange";
    case errc::parameter_out_of_range: return "ParameterOutOfRange";
    case errc::degenerate_split: return "DegenerateSplit";
    case errc::degenerate_denominator: return "DegenerateDenominator";
    case errc::gain_constraint_violated: return "GainConstraintViolated";
    case errc::zero_vector: return "ZeroVector";
    case errc::zero_direction: return "ZeroDirection";
    case errc::wrong_case: return "WrongCase";
    case errc::non_finite_cost: return "NonFiniteCost";
    case errc::invalid_input: return "InvalidInput";
  }
  return "Unknown";
}

// Numeric degeneracies get their own CLI exit code (3) as opposed to plain
// input validation failures (2).
inline bool is_degeneracy(errc c) {
  switch (c) {
    case errc::singular_matrix:
    case errc::singular_r:
    case errc::singular_covariance:
    case errc::degenerate_split:
    case errc::degenerate_denominator:
    case errc::non_finite_cost:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace conservafuse
