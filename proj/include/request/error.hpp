#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace request {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// An identifier or index that does not resolve, or a span out of bounds.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// A record that parses but violates a data-model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A precondition of an operation was violated by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace request
