#pragma once

#include <stdexcept>
#include <string>

namespace projcons {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Matrix/vector dimensions do not line up.
struct ShapeError : Error {
  using Error::Error;
};

// A_i x = b_i (or the stacked system) has no solution where one is required.
struct InconsistentEquation : Error {
  using Error::Error;
};

// A documented precondition of an operation was violated by the caller.
struct ContractViolation : Error {
  using Error::Error;
};

// All projectors are the identity; the quotient has dimension zero and the
// run degenerates to unconstrained consensus.
struct DegenerateQuotient : Error {
  using Error::Error;
};

// An agent state stopped satisfying its private equation beyond tolerance.
struct FeasibilityDrift : Error {
  using Error::Error;
};

// A matrix that must have full rank (or a determinant floor) does not.
struct RankError : Error {
  using Error::Error;
};

// A graph sequence is too short to contain one complete window.
struct InsufficientLength : Error {
  using Error::Error;
};

// An exhaustive enumeration was requested beyond its size gate.
struct BudgetExceeded : Error {
  using Error::Error;
};

// Experiment configuration failed validation; message carries the field path.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace projcons
