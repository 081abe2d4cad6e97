#pragma once

#include <stdexcept>
#include <string>

namespace cidr {

/// Base class for every error raised by the library. `exit_code()` is the
/// process status the CLI reports for it.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 70; }
};

/// Caller supplied something outside an operation's preconditions.
class InputError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// Non-finite values reached a numeric routine.
class NumericError : public InputError {
 public:
  using InputError::InputError;
};

/// Bad configuration: unknown keys, out-of-range hyperparameters, tables
/// too large to allocate.
class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

/// A library invariant was violated.
class InternalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 70; }
};

}  // namespace cidr
