#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace avqoe {

enum class ErrorCode {
  Io,
  MalformedRow,
  ScoreOutOfRange,
  UnknownCondition,
  EmptyGroup,
  MissingMetadata,
  MissingCondition,
  DuplicateCondition,
  DimensionalityMismatch,
  EmptyDataset,
  InvalidConfig,
  NonFiniteLoss,
  LengthMismatch,
  EmptyInput,
  ConstantSeries,
  TooFewRows,
  InvalidModel,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "IoError";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::ScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorCode::UnknownCondition: return "UnknownCondition";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::MissingMetadata: return "MissingMetadata";
    case ErrorCode::MissingCondition: return "MissingCondition";
    case ErrorCode::DuplicateCondition: return "DuplicateCondition";
    case ErrorCode::DimensionalityMismatch: return "DimensionalityMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ConstantSeries: return "ConstantSeries";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::InvalidModel: return "InvalidModel";
  }
  return "Unknown";
}

/// Every failure raised by the toolkit carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace avqoe
