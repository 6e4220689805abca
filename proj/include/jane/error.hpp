#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace jane {

enum class ErrorCode {
  IndexOutOfRange,
  SelfLoop,
  ShapeMismatch,
  KTooLarge,
  NotConnected,
  TooLarge,
  NonPositiveScale,
  InvalidConfig,
  InvalidFraction,
  EmptyLabelSet,
  NoLabels,
  DivergenceDetected,
  ParseError,
  DimensionMismatch,
  UnknownLabelValue,
  ChecksumMismatch,
  IOError,
  PreconditionViolated,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failure positioned at a 1-based line and column of a named file.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, std::size_t column, const std::string& what)
      : Error(ErrorCode::ParseError,
              file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        file_(std::move(file)),
        line_(line),
        column_(column) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string file_;
  std::size_t line_;
  std::size_t column_;
};

}  // namespace jane
