#pragma once

#include <stdexcept>
#include <string>

namespace magpot {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition, malformed input or mismatched dimensions.
/// The command-line front end maps these to exit code 2.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class ParseError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class DimensionMismatch : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// A field whose coefficient vector is identically zero was passed where a
/// nonzero field is required (e.g. a stability ratio).
class ZeroField : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Numerical failure: no convergence, precision exhausted, rank loss.
/// Mapped to exit code 3.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class QuadratureNotConverged : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class CertificationFailure : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class PotentialNumericallyZero : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

}  // namespace magpot
