#pragma once

#include <stdexcept>
#include <string>

namespace fogest {

// Mirrors fogest_status in fogest.h; values must stay in sync.
enum class ErrorCode {
  InvalidArgument = 1,
  Range = 2,
  Parse = 3,
  Validation = 4,
  NotEnoughData = 5,
  DegenerateData = 6,
  Numeric = 7,
  Io = 8,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace fogest
