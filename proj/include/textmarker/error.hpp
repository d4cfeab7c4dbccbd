#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace textmarker {

enum class ErrorCode {
  InvalidArgument,
  EmptyText,
  ReplaceImpossible,
  EmptyDictionary,
  InsufficientPatterns,
  IoError,
  MalformedLine,
  LabelOutOfRange,
  EmptyDataset,
  NotEnoughEligibleSamples,
  SingleClassDataset,
  EmptyProbeSet,
  NoProbaCapability,
  NoCrossing,
  ProxyTooSmall,
  UserSetMismatch,
  SpawnError,
  ProtocolViolation,
  Timeout,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// that callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Thrown by load_jsonl; carries the 1-based line number.
class MalformedLineError : public Error {
 public:
  MalformedLineError(std::size_t line_no, const std::string& detail);

  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

// CLI exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitExternal = 4;

int exit_code_for(ErrorCode code);

}  // namespace textmarker
