#pragma once

#include <stdexcept>
#include <string>

namespace salwarp {

/// Base for every error raised by the library. Each subclass maps onto one
/// CLI exit code, see exit_code().
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 3; }
};

/// Bad configuration or command usage (exit 1).
class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
};

/// Unreadable or malformed input, including shape mismatches (exit 2).
class InputError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

class ShapeError : public InputError {
 public:
  using InputError::InputError;
};

/// A grid or map failed its structural invariant (exit 3).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Ψ has a zero fraction in a denominator of the expansion-factor sum.
class DegenerateDistributionError : public Error {
 public:
  using Error::Error;
};

}  // namespace salwarp
