#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace feshrf {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument lies outside the domain of a model function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Bad configuration: unknown unit, unknown key, invalid parameter set.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class SchemaError : public ConfigError {
 public:
  SchemaError(const std::string& what, std::size_t line)
      : ConfigError(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Magnetic field exactly on the resonance pole B = B0.
class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Scattering length is not positive, so there is no Feshbach molecule.
class NoBoundStateError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Resonance data not on a single bound branch of the fitted resonance.
class InvalidBranchError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Too few or uninformative data points for the requested estimate.
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

// Quadrature (or another iterative numeric kernel) failed to reach its tolerance.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double estimate, double achieved_error)
      : Error(what), estimate_(estimate), achieved_error_(achieved_error) {}
  double estimate() const noexcept { return estimate_; }
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double estimate_;
  double achieved_error_;
};

// Self-consistent iteration did not settle; keeps the width history per round.
class IterationError : public Error {
 public:
  IterationError(const std::string& what, std::vector<double> delta_b_trace)
      : Error(what), trace_(std::move(delta_b_trace)) {}
  const std::vector<double>& delta_b_trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

}  // namespace feshrf
