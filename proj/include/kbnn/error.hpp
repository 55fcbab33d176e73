#pragma once

#include <stdexcept>
#include <string>

namespace kbnn {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition was violated (e.g. negative variance).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid architecture, activation list or training configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numeric breakdown during an update. Carries the offending layer when known.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what, int layer = -1)
      : Error(what), layer_(layer) {}
  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

/// Symmetric factorization failed even after the maximum jitter.
class SingularMatrixError : public NumericError {
 public:
  SingularMatrixError(const std::string& what, double jitter)
      : NumericError(what), jitter_(jitter) {}
  double jitter() const noexcept { return jitter_; }

 private:
  double jitter_;
};

/// Model or dataset file could not be read. The message names the field, row or column.
class LoadError : public Error {
 public:
  using Error::Error;
};

}  // namespace kbnn
