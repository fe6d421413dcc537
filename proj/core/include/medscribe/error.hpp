#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace medscribe {

enum class ErrorCode {
  InvalidArgument,
  InvariantViolation,
  InvalidUtf8,
  EmptyTranscript,
  UnknownSpeakerLabel,
  MalformedLine,
  UnsupportedNumeral,
  EmptyReference,
  DimensionMismatch,
  ZeroVector,
  EmptyText,
  UnboundPlaceholder,
  TransportError,
  ServiceUnavailable,
  HttpStatus,
  SchemaMismatch,
  BackendFailure,
  ConfigError,
  IoError,
  UnmatchedIds,
  SchemaVersionMismatch,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library is a medscribe::Error. The optional
// location fields are set where the code has one to report (a file line, a
// byte offset into the text under processing).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  Error(ErrorCode code, const std::string& message, std::size_t line,
        std::string offending);

  ErrorCode code() const noexcept { return code_; }
  // 1-based line number, 0 when not applicable.
  std::size_t line() const noexcept { return line_; }
  const std::string& offending() const noexcept { return offending_; }

 private:
  ErrorCode code_;
  std::size_t line_ = 0;
  std::string offending_;
};

class UnsupportedNumeral : public Error {
 public:
  UnsupportedNumeral(std::string run, std::size_t offset);
  const std::string& run() const noexcept { return run_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string run_;
  std::size_t offset_;
};

class UnboundPlaceholder : public Error {
 public:
  explicit UnboundPlaceholder(std::string name);
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class HttpError : public Error {
 public:
  HttpError(ErrorCode code, const std::string& message, int status);
  // 0 for transport-level failures.
  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace medscribe
