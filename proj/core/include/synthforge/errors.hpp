#pragma once

#include <stdexcept>
#include <string>

namespace synthforge {

/// Base of every error raised by the library. The CLI maps any of these to
/// exit code 2 (generation or validation failure).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a documented precondition or type invariant.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or otherwise unusable numeric state (e.g. eigensolver failure).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Rejection sampling gave up.
class GenerationExhaustedError : public Error {
 public:
  using Error::Error;
};

/// An IFS orbit left the bounded region.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// A source database holds fewer classes or images than requested.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or malformed file.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace synthforge
