#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sp {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed grammar or corpus text. `line()` is 1-based, 0 when unknown.
class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& message);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Structurally invalid grammar content (duplicate ids, bad frequency, ...).
class GrammarError : public Error {
 public:
  using Error::Error;
};

class UnknownSymbolError : public Error {
 public:
  using Error::Error;
};

/// A pattern that cannot be cited: no service symbols, or indistinguishable
/// from another pattern.
class IdentifierError : public Error {
 public:
  using Error::Error;
};

class InvalidAlignmentError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  enum class Kind { HashMismatch, UnknownPattern, LengthMismatch, Malformed };

  DecodeError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace sp
