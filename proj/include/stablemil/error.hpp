#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stablemil {

enum class ErrorCode {
  kUnknownTruth,
  kParseError,
  kDimMismatch,
  kEmptyDataset,
  kIoError,
  kSingleClass,
  kTooFewPoints,
  kNotNegativeBag,
  kEmptyNegatives,
  kTooFewNegatives,
  kMissingClass,
  kTooFewReferences,
  kEmptyPool,
  kInvalidConfig,
  kMissingBackgroundTag,
  kInvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Configuration problems map to CLI exit code 2, everything else that comes
// from the input data maps to exit code 3.
bool is_config_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stablemil
