#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace simpeval {

enum class ErrorCode {
  SequenceTooShort,
  DegenerateHorizon,
  EmptyReference,
  DimensionMismatch,
  EmptyMatrix,
  ParseError,
  TokenCountMismatch,
  Timeout,
  ProtocolError,
  DuplicateSourceId,
  UnknownSourceId,
  EmptyInput,
  RateOutOfRange,
  IoError,
  EmptySource,
  InvalidOrder,
  EmptyScores,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SequenceTooShort: return "SequenceTooShort";
    case ErrorCode::DegenerateHorizon: return "DegenerateHorizon";
    case ErrorCode::EmptyReference: return "EmptyReference";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::TokenCountMismatch: return "TokenCountMismatch";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::DuplicateSourceId: return "DuplicateSourceId";
    case ErrorCode::UnknownSourceId: return "UnknownSourceId";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::RateOutOfRange: return "RateOutOfRange";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EmptySource: return "EmptySource";
    case ErrorCode::InvalidOrder: return "InvalidOrder";
    case ErrorCode::EmptyScores: return "EmptyScores";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// All toolkit failures are reported through this exception type; `code()`
/// identifies the contract that was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace simpeval
