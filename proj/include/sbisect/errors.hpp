// SPDX-License-Identifier: Apache-2.0
#ifndef SBISECT_ERRORS_HPP
#define SBISECT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sbisect {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input: distribution spec strings, data files, flags.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration detected before any numerics run (e.g. runs < 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical precondition failures. The CLI maps all of these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InvalidBracketError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoDensityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EndpointAtomError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class PreconditionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EmptySampleError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateColumnError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonPositiveValueError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace sbisect

#endif  // SBISECT_ERRORS_HPP
