#include "textmarker/error.hpp"

namespace textmarker {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::ReplaceImpossible: return "ReplaceImpossible";
    case ErrorCode::EmptyDictionary: return "EmptyDictionary";
    case ErrorCode::InsufficientPatterns: return "InsufficientPatterns";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::NotEnoughEligibleSamples: return "NotEnoughEligibleSamples";
    case ErrorCode::SingleClassDataset: return "SingleClassDataset";
    case ErrorCode::EmptyProbeSet: return "EmptyProbeSet";
    case ErrorCode::NoProbaCapability: return "NoProbaCapability";
    case ErrorCode::NoCrossing: return "NoCrossing";
    case ErrorCode::ProxyTooSmall: return "ProxyTooSmall";
    case ErrorCode::UserSetMismatch: return "UserSetMismatch";
    case ErrorCode::SpawnError: return "SpawnError";
    case ErrorCode::ProtocolViolation: return "ProtocolViolation";
    case ErrorCode::Timeout: return "Timeout";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

MalformedLineError::MalformedLineError(std::size_t line_no, const std::string& detail)
    : Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": " + detail),
      line_no_(line_no) {}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return kExitUsage;
    case ErrorCode::SpawnError:
    case ErrorCode::ProtocolViolation:
    case ErrorCode::Timeout:
    case ErrorCode::NoProbaCapability:
      return kExitExternal;
    default:
      return kExitData;
  }
}

}  // namespace textmarker
