#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace twin {

enum class ErrorCode {
  InvariantViolation,
  PreconditionViolation,
  UnknownPersona,
  UnknownMemoryId,
  UnknownSession,
  ClockRegression,
  IoFailure,
  SchemaVersionMismatch,
  EmptyText,
  EmptyLabelSet,
  BackendUnavailable,
  Timeout,
  PlaybookMiss,
  MalformedScore,
  NegativeElapsedTime,
  OutOfRange,
  UnembeddedMemory,
  EmptyWindow,
  SessionClosed,
  NonMonotonicTimestamp,
  ParseError,
  EmptySession,
  AlreadyFinalized,
  NonFiniteValue,
  InsufficientBaseline,
  ScenarioParseError,
  BindFailure,
  SnapshotLoadFailure,
  ConfigError,
};

// Stable snake_case name, used as the machine-readable code on the wire.
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  Error(ErrorCode code, const std::string& message, std::size_t line);

  ErrorCode code() const noexcept { return code_; }
  // 1-based source line for parse errors.
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace twin
