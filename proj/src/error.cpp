#include "mmreid/error.hpp"

namespace mmreid {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::config_error: return "config_error";
    case ErrorCode::io_failure: return "io_failure";
    case ErrorCode::bad_magic: return "bad_magic";
    case ErrorCode::bad_version: return "bad_version";
    case ErrorCode::truncated_payload: return "truncated_payload";
    case ErrorCode::non_finite_value: return "non_finite_value";
    case ErrorCode::zero_dimension: return "zero_dimension";
    case ErrorCode::malformed_record: return "malformed_record";
    case ErrorCode::malformed_csv: return "malformed_csv";
    case ErrorCode::malformed_json: return "malformed_json";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::empty_set: return "empty_set";
    case ErrorCode::batch_invalid: return "batch_invalid";
    case ErrorCode::single_identity: return "single_identity";
    case ErrorCode::already_scaled: return "already_scaled";
    case ErrorCode::not_scaled: return "not_scaled";
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::split_infeasible: return "split_infeasible";
    case ErrorCode::no_valid_queries: return "no_valid_queries";
    case ErrorCode::kink_detected: return "kink_detected";
    case ErrorCode::invalid_argument: return "invalid_argument";
  }
  return "unknown";
}

int error_exit_class(ErrorCode code) {
  switch (code) {
    case ErrorCode::config_error:
      return 2;
    case ErrorCode::io_failure:
    case ErrorCode::bad_magic:
    case ErrorCode::bad_version:
    case ErrorCode::truncated_payload:
    case ErrorCode::non_finite_value:
    case ErrorCode::zero_dimension:
    case ErrorCode::malformed_record:
    case ErrorCode::malformed_csv:
    case ErrorCode::malformed_json:
      return 3;
    default:
      return 4;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code) {}

}  // namespace mmreid
