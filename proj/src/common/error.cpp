#include "temudance/common/error.hpp"

#include <cstdlib>
#include <iostream>

namespace temu {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimension: return "dimension error";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kSingularInput: return "singular input";
    case ErrorCode::kAmbiguousAxes: return "ambiguous axes";
    case ErrorCode::kDegenerateYaw: return "degenerate yaw";
    case ErrorCode::kUnsupportedPrimitive: return "unsupported primitive";
    case ErrorCode::kUnknownPredicate: return "unknown predicate";
    case ErrorCode::kSequenceTooShort: return "sequence too short";
    case ErrorCode::kEmptyInput: return "empty input";
    case ErrorCode::kDegenerateEmbedding: return "degenerate embedding";
    case ErrorCode::kCovarianceUndefined: return "covariance undefined";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kBankMismatch: return "bank mismatch";
    case ErrorCode::kFrozenDrift: return "frozen parameter drift";
    case ErrorCode::kDependency: return "missing dependency";
    case ErrorCode::kSchema: return "schema violation";
    case ErrorCode::kIo: return "io error";
    case ErrorCode::kGenerator: return "generator failure";
  }
  return "error";
}

void warn(std::string_view message) {
  if (std::getenv("TEMU_QUIET") != nullptr) return;
  std::cerr << "warning: " << message << '\n';
}

}  // namespace temu
