#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bullion {

enum class ErrorCode {
  InvalidArgument,
  EmptyInput,
  UnsupportedType,
  CorruptBlock,
  SchemaMismatch,
  BadMagic,
  TruncatedFooter,
  ColumnNotFound,
  RowOutOfRange,
  UnsupportedEncoding,
  ExclusiveAccessRequired,
  RewriteRequired,
  MissingScoreColumn,
  NonNumericScore,
  UnknownColumn,
  DistinctOverflow,
  LengthMismatch,
  ParseError,
  IoError,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code), message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

inline void check(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace bullion
