#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace sumalign {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SUMALIGN_DEFINE_ERROR(Name)         \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

// text / lexical alignment
SUMALIGN_DEFINE_ERROR(MismatchedNormalization);
SUMALIGN_DEFINE_ERROR(NoContentTokens);

// embeddings / semantic alignment
SUMALIGN_DEFINE_ERROR(BadHeader);
SUMALIGN_DEFINE_ERROR(DimensionMismatch);
SUMALIGN_DEFINE_ERROR(DuplicateToken);
SUMALIGN_DEFINE_ERROR(TokenCountMismatch);
SUMALIGN_DEFINE_ERROR(MissingExample);
SUMALIGN_DEFINE_ERROR(ZeroVector);
SUMALIGN_DEFINE_ERROR(EmptyComparison);

// metrics
SUMALIGN_DEFINE_ERROR(TooShort);

// pipeline / cache
SUMALIGN_DEFINE_ERROR(DuplicateId);
SUMALIGN_DEFINE_ERROR(FingerprintMismatch);
SUMALIGN_DEFINE_ERROR(VersionError);
SUMALIGN_DEFINE_ERROR(ConfigError);
SUMALIGN_DEFINE_ERROR(IoError);

#undef SUMALIGN_DEFINE_ERROR

/// Malformed input at a given (1-based) line of a line-oriented file.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A JSON line parsed but a required field is missing or has the wrong type.
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, std::string field, const std::string& what)
      : Error("line " + std::to_string(line) + ": field '" + field + "': " + what),
        line_(line),
        field_(std::move(field)) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace sumalign
