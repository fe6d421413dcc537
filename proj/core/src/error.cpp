#include "medscribe/error.hpp"

#include <fmt/format.h>

namespace medscribe {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::InvalidUtf8: return "InvalidUtf8";
    case ErrorCode::EmptyTranscript: return "EmptyTranscript";
    case ErrorCode::UnknownSpeakerLabel: return "UnknownSpeakerLabel";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::UnsupportedNumeral: return "UnsupportedNumeral";
    case ErrorCode::EmptyReference: return "EmptyReference";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::UnboundPlaceholder: return "UnboundPlaceholder";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::ServiceUnavailable: return "ServiceUnavailable";
    case ErrorCode::HttpStatus: return "HttpStatus";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::BackendFailure: return "BackendFailure";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnmatchedIds: return "UnmatchedIds";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(fmt::format("{}: {}", to_string(code), message)),
      code_(code) {}

Error::Error(ErrorCode code, const std::string& message, std::size_t line,
             std::string offending)
    : std::runtime_error(fmt::format("{} (line {}): {}: '{}'", to_string(code),
                                     line, message, offending)),
      code_(code),
      line_(line),
      offending_(std::move(offending)) {}

UnsupportedNumeral::UnsupportedNumeral(std::string run, std::size_t offset)
    : Error(ErrorCode::UnsupportedNumeral,
            fmt::format("digit run '{}' at offset {} exceeds 999999999", run,
                        offset)),
      run_(std::move(run)),
      offset_(offset) {}

UnboundPlaceholder::UnboundPlaceholder(std::string name)
    : Error(ErrorCode::UnboundPlaceholder,
            fmt::format("placeholder {{{}}} has no binding", name)),
      name_(std::move(name)) {}

HttpError::HttpError(ErrorCode code, const std::string& message, int status)
    : Error(code, message), status_(status) {}

}  // namespace medscribe
