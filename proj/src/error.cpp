#include "paplab/error.hpp"

namespace paplab {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kUnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kNameKeyConflict: return "NameKeyConflict";
    case ErrorCode::kBadCrc: return "BadCrc";
    case ErrorCode::kUnknownMessageTag: return "UnknownMessageTag";
    case ErrorCode::kTruncatedFrame: return "TruncatedFrame";
    case ErrorCode::kNoDatabase: return "NoDatabase";
    case ErrorCode::kNoPendingSession: return "NoPendingSession";
    case ErrorCode::kPreconditionViolation: return "PreconditionViolation";
    case ErrorCode::kUnexpectedMessage: return "UnexpectedMessage";
    case ErrorCode::kCapabilityViolation: return "CapabilityViolation";
    case ErrorCode::kCapabilityMissing: return "CapabilityMissing";
    case ErrorCode::kMalformedLog: return "MalformedLog";
    case ErrorCode::kNoTagAuth: return "NoTagAuth";
    case ErrorCode::kDegenerateGame: return "DegenerateGame";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUnknownEntityRef: return "UnknownEntityRef";
    case ErrorCode::kInvalidCapabilityCombo: return "InvalidCapabilityCombo";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace paplab
