#pragma once

#include <stdexcept>
#include <string>

namespace gmtorus {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A field value violates a pointwise precondition (positivity, finiteness,
// normalization) of the operation it is passed to.
struct DomainError : Error {
  using Error::Error;
};

// A declarative specification (potential, config value) is malformed or
// incompatible with the target grid.
struct SpecError : Error {
  using Error::Error;
};

// Problem size exceeds the dense-solver budget.
struct BudgetError : Error {
  using Error::Error;
};

// An iterative solver exhausted its iteration allowance.
struct ConvergenceError : Error {
  using Error::Error;
};

// The computed principal eigenvector changes sign beyond tolerance, which
// signals a discretization too coarse for the requested problem.
struct PositivityError : Error {
  using Error::Error;
};

// The selected eigenvalue has an imaginary part above tolerance.
struct NonrealError : Error {
  using Error::Error;
};

// Operation requires a specific spatial dimension.
struct DimError : Error {
  using Error::Error;
};

// A root search failed to bracket its target inside the search box.
struct RangeError : Error {
  using Error::Error;
};

// Config file cannot be parsed; message carries file:line context.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace gmtorus
