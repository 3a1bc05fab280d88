#include "sve/error.hpp"

namespace sve {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "ok";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kNotFound: return "not found";
    case ErrorCode::kMalformed: return "malformed input";
    case ErrorCode::kUnsupported: return "unsupported format";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kOutOfRange: return "value out of range";
    case ErrorCode::kDuplicateId: return "duplicate id";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kDegenerate: return "degenerate numeric case";
    case ErrorCode::kVersionMismatch: return "version mismatch";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kClassMismatch: return "class mismatch";
    case ErrorCode::kInternal: return "internal error";
  }
  return "unknown error";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace sve
