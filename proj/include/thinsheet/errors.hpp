#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace thinsheet {

/// Base of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input. `line()` is 1-based; 0 when the location is unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(line == 0 ? message : "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class EmptyModelError : public Error {
 public:
  EmptyModelError() : Error("model contains no points") {}
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Sphere fit collapsed to its plane limit (u0 -> 0).
class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a mapping or grid.
class DomainError : public Error {
 public:
  using Error::Error;
};

class IllConditionedRigidityError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& message, long iterations, double residual)
      : Error(message + " (iterations " + std::to_string(iterations) + ", residual " +
              std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  long iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  long iterations_;
  double residual_;
};

class SingularOperatorError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// A cooperative stop request interrupted a plate solve.
class SolveCancelled : public Error {
 public:
  SolveCancelled() : Error("plate solve cancelled") {}
};

}  // namespace thinsheet
