#pragma once

#include <stdexcept>
#include <string>

namespace hiformer {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor extents that do not fit an operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed, missing or degenerate input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values produced during computation (NaN loss, overflow).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. calling backward on a non-scalar.
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace hiformer
