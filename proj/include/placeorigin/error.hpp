#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace placeorigin {

enum class ErrorCode {
  EmptyRoot,
  EmptyName,
  MissingContext,
  MalformedRow,
  BadCoordinate,
  RatioInfeasible,
  EndpointError,
  EmptyResult,
  HttpError,
  MalformedResponse,
  IoError,
  CorruptSnapshot,
  EncoderFailure,
  DimensionMismatch,
  EmptyEmbedding,
  InvalidArgument,
  BudgetUnsatisfiable,
  ContextOverflow,
  MissingJudgment,
  InvalidJudgment,
  ConfigError,
  ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code. Every recoverable failure in
/// the library surfaces as one of these.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Row-level parse failure; `row` is the 1-based physical line number.
class RowError : public Error {
 public:
  RowError(std::size_t row, const std::string& message)
      : Error(ErrorCode::MalformedRow,
              "row " + std::to_string(row) + ": " + message),
        row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace placeorigin
