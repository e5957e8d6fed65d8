#pragma once

#include <stdexcept>
#include <string>

namespace sgf {

enum class ErrorCode {
  NotSPD,
  ShapeMismatch,
  GridTooSmall,
  NonSymmetricPattern,
  RankExceedsSize,
  IndefiniteDetected,
  ParseError,
  CountMismatch,
  NotSymmetric,
  DimensionMismatch,
  NonPositiveField,
  InvalidArgument,
  ConfigError,
  IoError,
  TraceMismatch,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSPD: return "NotSPD";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::GridTooSmall: return "GridTooSmall";
    case ErrorCode::NonSymmetricPattern: return "NonSymmetricPattern";
    case ErrorCode::RankExceedsSize: return "RankExceedsSize";
    case ErrorCode::IndefiniteDetected: return "IndefiniteDetected";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveField: return "NonPositiveField";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::TraceMismatch: return "TraceMismatch";
  }
  return "Unknown";
}

}  // namespace sgf
