#include "twin/error.hpp"

namespace twin {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvariantViolation: return "invariant_violation";
    case ErrorCode::PreconditionViolation: return "precondition_violation";
    case ErrorCode::UnknownPersona: return "unknown_persona";
    case ErrorCode::UnknownMemoryId: return "unknown_memory_id";
    case ErrorCode::UnknownSession: return "unknown_session";
    case ErrorCode::ClockRegression: return "clock_regression";
    case ErrorCode::IoFailure: return "io_failure";
    case ErrorCode::SchemaVersionMismatch: return "schema_version_mismatch";
    case ErrorCode::EmptyText: return "empty_text";
    case ErrorCode::EmptyLabelSet: return "empty_label_set";
    case ErrorCode::BackendUnavailable: return "backend_unavailable";
    case ErrorCode::Timeout: return "timeout";
    case ErrorCode::PlaybookMiss: return "playbook_miss";
    case ErrorCode::MalformedScore: return "malformed_score";
    case ErrorCode::NegativeElapsedTime: return "negative_elapsed_time";
    case ErrorCode::OutOfRange: return "out_of_range";
    case ErrorCode::UnembeddedMemory: return "unembedded_memory";
    case ErrorCode::EmptyWindow: return "empty_window";
    case ErrorCode::SessionClosed: return "session_closed";
    case ErrorCode::NonMonotonicTimestamp: return "non_monotonic_timestamp";
    case ErrorCode::ParseError: return "parse_error";
    case ErrorCode::EmptySession: return "empty_session";
    case ErrorCode::AlreadyFinalized: return "already_finalized";
    case ErrorCode::NonFiniteValue: return "non_finite_value";
    case ErrorCode::InsufficientBaseline: return "insufficient_baseline";
    case ErrorCode::ScenarioParseError: return "scenario_parse_error";
    case ErrorCode::BindFailure: return "bind_failure";
    case ErrorCode::SnapshotLoadFailure: return "snapshot_load_failure";
    case ErrorCode::ConfigError: return "config_error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

Error::Error(ErrorCode code, const std::string& message, std::size_t line)
    : std::runtime_error(std::string(to_string(code)) + " (line " + std::to_string(line) + "): " + message),
      code_(code),
      line_(line) {}

}  // namespace twin
