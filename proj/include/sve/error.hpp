#pragma once

#include <stdexcept>
#include <string>

namespace sve {

// Mirrors sve_status in sve.h; values must stay in sync.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kNotFound = 2,
  kMalformed = 3,
  kUnsupported = 4,
  kDimensionMismatch = 5,
  kOutOfRange = 6,
  kDuplicateId = 7,
  kNonFinite = 8,
  kDegenerate = 9,
  kVersionMismatch = 10,
  kIo = 11,
  kClassMismatch = 12,
  kInternal = 13,
};

const char* to_string(ErrorCode code);

/// Exception carrying a categorized error code. Every failure in the core
/// library is reported through this type; the C API maps it to sve_status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace sve
