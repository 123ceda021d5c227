#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace temu {

enum class ErrorCode {
  kDimension,
  kInvalidArgument,
  kSingularInput,
  kAmbiguousAxes,
  kDegenerateYaw,
  kUnsupportedPrimitive,
  kUnknownPredicate,
  kSequenceTooShort,
  kEmptyInput,
  kDegenerateEmbedding,
  kCovarianceUndefined,
  kDivergence,
  kBankMismatch,
  kFrozenDrift,
  kDependency,
  kSchema,
  kIo,
  kGenerator,
};

std::string_view error_code_name(ErrorCode code);

// Every library failure surfaces as this type; `code()` lets callers and tests
// branch on the failure class without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code), message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

// Writes a warning line to stderr. Silenced when TEMU_QUIET is set.
void warn(std::string_view message);

}  // namespace temu
