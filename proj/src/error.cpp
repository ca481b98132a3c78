#include "placeorigin/error.hpp"

namespace placeorigin {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyRoot: return "EmptyRoot";
    case ErrorCode::EmptyName: return "EmptyName";
    case ErrorCode::MissingContext: return "MissingContext";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::BadCoordinate: return "BadCoordinate";
    case ErrorCode::RatioInfeasible: return "RatioInfeasible";
    case ErrorCode::EndpointError: return "EndpointError";
    case ErrorCode::EmptyResult: return "EmptyResult";
    case ErrorCode::HttpError: return "HttpError";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::CorruptSnapshot: return "CorruptSnapshot";
    case ErrorCode::EncoderFailure: return "EncoderFailure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyEmbedding: return "EmptyEmbedding";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BudgetUnsatisfiable: return "BudgetUnsatisfiable";
    case ErrorCode::ContextOverflow: return "ContextOverflow";
    case ErrorCode::MissingJudgment: return "MissingJudgment";
    case ErrorCode::InvalidJudgment: return "InvalidJudgment";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace placeorigin
