#pragma once

#include <stdexcept>
#include <string>

namespace cherry {

enum class ErrorCode {
  invalid_argument = 1,
  not_found,
  insufficient_data,
  degenerate_predictor,
  domain_error,
  no_target_data,
  no_calibration,
  no_weight_data,
  empty_schedule,
  unknown_stage,
  empty_input,
  parse_error,
  io_error,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so the
// C API can translate it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cherry
