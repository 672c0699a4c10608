#pragma once

#include <stdexcept>
#include <string>

namespace palflow {

// Input violates a size contract (vector/matrix dimensions).
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Input violates a value contract (sign, ordering, emptiness, ...).
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// State left the mathematical domain of an operation (e.g. log of a
// nonpositive multiplier).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// The integrator detected a fault it cannot recover from: multiplier
// positivity breached beyond roundoff, or adaptive step underflow.
struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A problem file failed to parse or validate; message names the field.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace palflow
