#pragma once

#include <stdexcept>
#include <string>

namespace dat {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent matrix/vector shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A precondition on a parameter value (positivity, definiteness, ...) failed.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// One of the four standing assumptions of the tracking problem does not hold:
//   1 graph undirected and connected
//   2 (A, B) stabilizable
//   3 Lipschitz-type field with f(0, t) = 0
//   4 bounded reference signals
class AssumptionViolation : public Error {
 public:
  AssumptionViolation(int assumption, const std::string& what)
      : Error("Assumption " + std::to_string(assumption) + " violated: " + what),
        assumption_(assumption) {}

  int assumption() const noexcept { return assumption_; }

 private:
  int assumption_;
};

// Iterative solver stopped without meeting its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual, int iterations)
      : Error(what), last_residual_(last_residual), iterations_(iterations) {}

  double last_residual() const noexcept { return last_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

}  // namespace dat
