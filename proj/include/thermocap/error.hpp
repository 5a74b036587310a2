#pragma once

#include <stdexcept>
#include <string>

namespace thermocap {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class CoefficientBoundError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of the singular potential, |s| >= 1.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Right-hand side incompatible with a Neumann problem (nonzero mean) or
/// with the twin-run metric.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& msg, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// A monitored invariant (mass, bounds, barrier) broke beyond tolerance.
class InvariantViolation : public Error {
 public:
  InvariantViolation(std::string invariant, const std::string& detail)
      : Error(invariant + ": " + detail), invariant_(std::move(invariant)) {}
  const std::string& invariant() const { return invariant_; }

 private:
  std::string invariant_;
};

}  // namespace thermocap
