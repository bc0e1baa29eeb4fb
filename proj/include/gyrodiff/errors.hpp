#pragma once

#include <stdexcept>
#include <string>

namespace gyrodiff {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameters, violated preconditions, malformed configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Distributions or kernels built on different velocity grids.
class GridMismatch : public ValidationError {
 public:
  GridMismatch() : ValidationError("operands live on different velocity grids") {}
};

// Right-hand side outside the range of the operator being inverted.
class SolvabilityError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double contraction)
      : Error(what), contraction_(contraction) {}
  double contraction() const { return contraction_; }

 private:
  double contraction_;
};

// Time step above the reported stability bound.
class StabilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace gyrodiff
