#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nwidths {

enum class ErrorCode {
  ParseError,
  InvalidParams,
  NotCompact,
  LimitingCase,
  HypothesisFailure,
  BoundaryCase,
  UnsupportedRegion,
  OracleTooLarge,
  EnumerationTooLarge,
  RegimeMismatch,
  InfeasibleConstraints,
  InsufficientPoints,
  NonPositiveValue,
};

inline std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NotCompact: return "NotCompact";
    case ErrorCode::LimitingCase: return "LimitingCase";
    case ErrorCode::HypothesisFailure: return "HypothesisFailure";
    case ErrorCode::BoundaryCase: return "BoundaryCase";
    case ErrorCode::UnsupportedRegion: return "UnsupportedRegion";
    case ErrorCode::OracleTooLarge: return "OracleTooLarge";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::RegimeMismatch: return "RegimeMismatch";
    case ErrorCode::InfeasibleConstraints: return "InfeasibleConstraints";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
  }
  return "Unknown";
}

/// Process exit status for each error; 1 is reserved for scan violations.
inline int exit_code(ErrorCode code) { return 10 + static_cast<int>(code); }

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nwidths
