#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fmpp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of a function (e.g. a negative lag).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A computation produced a non-finite value.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// The backtracking line search drove the step below its floor.
class StagnationError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Integer arithmetic on marker-space sizes overflowed.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent shapes, invalid hyperparameters or mismatched inputs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace fmpp
