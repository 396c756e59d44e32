#pragma once

#include <stdexcept>
#include <string>

namespace flowda {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// An argument violated an operation's contract (shape mismatch, value out of
// range, empty evaluation region).
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(what) {}
};

// A file's content could not be parsed. `kind()` distinguishes the failure.
class ParseError : public Error {
 public:
  enum class Kind { bad_magic, truncated, malformed };
  ParseError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Filesystem-level failure: missing file, unreadable or unwritable path.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

// A configuration document or flag set failed validation.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

// Training produced a non-finite loss; the step is aborted, never skipped.
class NonFiniteLossError : public Error {
 public:
  explicit NonFiniteLossError(const std::string& what) : Error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace flowda
