#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace paplab {

enum class ErrorCode {
  kUnknownIdentifier,
  kDuplicateId,
  kNameKeyConflict,
  kBadCrc,
  kUnknownMessageTag,
  kTruncatedFrame,
  kNoDatabase,
  kNoPendingSession,
  kPreconditionViolation,
  kUnexpectedMessage,
  kCapabilityViolation,
  kCapabilityMissing,
  kMalformedLog,
  kNoTagAuth,
  kDegenerateGame,
  kParseError,
  kUnknownEntityRef,
  kInvalidCapabilityCombo,
  kSchemaError,
  kIoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace paplab
