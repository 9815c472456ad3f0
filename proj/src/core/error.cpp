#include "cherry/error.hpp"

namespace cherry {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::not_found: return "not found";
    case ErrorCode::insufficient_data: return "insufficient data";
    case ErrorCode::degenerate_predictor: return "degenerate predictor";
    case ErrorCode::domain_error: return "domain error";
    case ErrorCode::no_target_data: return "no target data";
    case ErrorCode::no_calibration: return "no calibration for stage";
    case ErrorCode::no_weight_data: return "no weight data";
    case ErrorCode::empty_schedule: return "empty schedule";
    case ErrorCode::unknown_stage: return "unknown stage";
    case ErrorCode::empty_input: return "empty input";
    case ErrorCode::parse_error: return "parse error";
    case ErrorCode::io_error: return "I/O error";
  }
  return "unknown error";
}

}  // namespace cherry
