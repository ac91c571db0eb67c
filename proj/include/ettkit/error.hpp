/**
 * @file error.hpp
 * @brief Exception hierarchy shared by all ettkit modules.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace ettkit {

/// Base class of every exception thrown by ettkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands with incompatible shapes (variable count, order, arity).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An elementary function was applied outside of its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Integration, inversion or root-finding failure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The event manifold was not reached, or was reached non-transversally.
class EventError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A requested expansion exceeds the configured coefficient budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration, malformed input file or inconsistent data.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ettkit
