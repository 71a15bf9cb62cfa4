#include "fogest/error.hpp"

namespace fogest {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Range: return "out of range";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Validation: return "validation error";
    case ErrorCode::NotEnoughData: return "not enough data";
    case ErrorCode::DegenerateData: return "degenerate data";
    case ErrorCode::Numeric: return "numeric error";
    case ErrorCode::Io: return "i/o error";
  }
  return "unknown error";
}

}  // namespace fogest
