#pragma once

#include <stdexcept>
#include <string>

namespace vip {

enum class ErrorCode {
  MissingFrame,
  DimensionMismatch,
  DecodeError,
  IoError,
  EmptyClip,
  InvalidArgument,
  InvalidLatent,
  ContractViolation,
  PlanViolation,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFrame: return "MissingFrame";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EmptyClip: return "EmptyClip";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidLatent: return "InvalidLatent";
    case ErrorCode::ContractViolation: return "ContractViolation";
    case ErrorCode::PlanViolation: return "PlanViolation";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace vip
