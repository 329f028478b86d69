#pragma once

#include <stdexcept>
#include <string>

namespace mmreid {

// Machine-readable failure cause. The CLI maps each code onto an exit-code
// class: configuration (2), file format (3), protocol/shape (4).
enum class ErrorCode {
  // configuration
  config_error,

  // file format
  io_failure,
  bad_magic,
  bad_version,
  truncated_payload,
  non_finite_value,
  zero_dimension,
  malformed_record,
  malformed_csv,
  malformed_json,

  // protocol
  dimension_mismatch,
  empty_set,
  batch_invalid,
  single_identity,
  already_scaled,
  not_scaled,
  shape_mismatch,
  split_infeasible,
  no_valid_queries,
  kink_detected,
  invalid_argument,
};

// Stable identifier used in error messages and tests.
const char* error_code_name(ErrorCode code);

// 2 = configuration, 3 = file format, 4 = protocol.
int error_exit_class(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mmreid
