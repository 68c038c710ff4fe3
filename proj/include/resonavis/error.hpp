#pragma once

#include <stdexcept>
#include <string>

namespace resonavis {

enum class ErrorCode {
  misaligned_interface,
  non_integer_rows,
  invalid_geometry,
  invalid_material,
  degenerate_triangle,
  dimension_mismatch,
  not_positive_definite,
  singular_matrix,
  non_convergence,
  zero_start_vector,
  singular_pencil,
  no_converged_pairs,
  insufficient_samples,
  nonpositive_error,
  degenerate_denominator,
  zero_vector,
  config,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::misaligned_interface: return "misaligned-interface";
    case ErrorCode::non_integer_rows: return "non-integer-row";
    case ErrorCode::invalid_geometry: return "invalid-geometry";
    case ErrorCode::invalid_material: return "invalid-material";
    case ErrorCode::degenerate_triangle: return "degenerate-triangle";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::not_positive_definite: return "not-positive-definite";
    case ErrorCode::singular_matrix: return "singular-matrix";
    case ErrorCode::non_convergence: return "non-convergence";
    case ErrorCode::zero_start_vector: return "zero-start-vector";
    case ErrorCode::singular_pencil: return "singular-pencil";
    case ErrorCode::no_converged_pairs: return "no-converged-pairs";
    case ErrorCode::insufficient_samples: return "insufficient-samples";
    case ErrorCode::nonpositive_error: return "nonpositive-error";
    case ErrorCode::degenerate_denominator: return "degenerate-denominator";
    case ErrorCode::zero_vector: return "zero-vector";
    case ErrorCode::config: return "config";
  }
  return "unknown";
}

/// Exception type thrown by every module; `code()` identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace resonavis
