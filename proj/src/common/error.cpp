#include "geoforge/common/error.hpp"

namespace geoforge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::UndefinedPoint: return "UndefinedPoint";
    case ErrorCode::RedefinedPoint: return "RedefinedPoint";
    case ErrorCode::UnderdeterminedOrInvalid: return "UnderdeterminedOrInvalid";
    case ErrorCode::DegenerateAfterRetries: return "DegenerateAfterRetries";
    case ErrorCode::Unsatisfiable: return "Unsatisfiable";
    case ErrorCode::UnknownPredicate: return "UnknownPredicate";
    case ErrorCode::NoValidExtension: return "NoValidExtension";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::UnsoundDerivation: return "UnsoundDerivation";
    case ErrorCode::NotDerived: return "NotDerived";
    case ErrorCode::InvalidRule: return "InvalidRule";
    case ErrorCode::InsufficientConclusions: return "InsufficientConclusions";
    case ErrorCode::NoFalsifiableVariant: return "NoFalsifiableVariant";
    case ErrorCode::MissingTemplate: return "MissingTemplate";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::UnknownProblemId: return "UnknownProblemId";
    case ErrorCode::EndpointError: return "EndpointError";
    case ErrorCode::MissingImage: return "MissingImage";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace geoforge
