#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sitrec {

enum class ErrorCode {
  unknown_sensor,
  out_of_range,
  missing_sensor,
  syntax,
  schema,
  semantic,
  io,
  concurrent_modification,
  empty_training_set,
  missing_feature,
  expansion_limit,
  empty_dnf,
  missing_annotation,
  label_mismatch,
  missing_sensor_value,
  out_of_order_timestamp,
  infeasible_rule_set,
  length_mismatch,
  invalid_argument,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sitrec
