#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geoforge {

enum class ErrorCode {
  // kernel
  UnknownTemplate,
  ArityMismatch,
  UndefinedPoint,
  RedefinedPoint,
  UnderdeterminedOrInvalid,
  DegenerateAfterRetries,
  Unsatisfiable,
  UnknownPredicate,
  // sampler
  NoValidExtension,
  EmptyPool,
  // engine
  UnsoundDerivation,
  NotDerived,
  InvalidRule,
  // forge
  InsufficientConclusions,
  NoFalsifiableVariant,
  // render
  MissingTemplate,
  // dataset
  SchemaMismatch,
  MalformedLine,
  // eval
  UnknownProblemId,
  EndpointError,
  MissingImage,
  // cli / pipeline
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the whole library; callers branch on code().
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace geoforge
