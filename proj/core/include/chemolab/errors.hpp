#pragma once

#include <stdexcept>
#include <string>

namespace chemolab {

/// Bad input: configuration keys, preconditions, malformed files. Maps to CLI exit 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The discretization broke down (solver cap, positivity loss). Maps to CLI exit 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PositivityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SolverDivergence : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A monitored hard invariant failed on a trajectory. Maps to CLI exit 4.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace chemolab
