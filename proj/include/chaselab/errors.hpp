#pragma once

#include <stdexcept>
#include <string>

namespace chaselab {

// Base for every error the library raises on bad input or unsupported use.
class ChaseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite or negative distances, ragged matrices, unparsable text.
class MalformedInput : public ChaseError {
 public:
  using ChaseError::ChaseError;
};

// A precondition on a numeric argument failed (radius <= 0, gamma <= 1, ...).
class InvalidArgument : public ChaseError {
 public:
  using ChaseError::ChaseError;
};

// The requested (body, norm) combination has no exact routine.
class Unsupported : public ChaseError {
 public:
  using ChaseError::ChaseError;
};

// A selector or adversary broke the game contract.
class ContractViolation : public ChaseError {
 public:
  using ChaseError::ChaseError;
};

// Parameters push a construction past a hard size or numeric limit.
class CapacityExceeded : public ChaseError {
 public:
  using ChaseError::ChaseError;
};

// The experiment configuration failed validation; the message names the field.
class ConfigError : public ChaseError {
 public:
  using ChaseError::ChaseError;
};

}  // namespace chaselab
