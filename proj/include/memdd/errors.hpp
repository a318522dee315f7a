#pragma once

#include <stdexcept>
#include <string>

namespace memdd {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGrid : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class InvalidEdge : public Error {
 public:
  using Error::Error;
};

class LinearSolveError : public Error {
 public:
  using Error::Error;
};

class AssemblyError : public Error {
 public:
  using Error::Error;
};

class DiagnosticError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ComparisonError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Newton ran out of iterations; carries the last residual norm so callers
/// can decide whether to retry with a smaller time step.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, double final_residual, int iterations)
      : Error(what), final_residual_(final_residual), iterations_(iterations) {}
  double final_residual() const noexcept { return final_residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double final_residual_;
  int iterations_;
};

/// A time step failed even after exhausting the dt-halving budget.
class StepError : public Error {
 public:
  StepError(const std::string& what, double time, double dt, double final_residual)
      : Error(what), time_(time), dt_(dt), final_residual_(final_residual) {}
  double time() const noexcept { return time_; }
  double dt() const noexcept { return dt_; }
  double final_residual() const noexcept { return final_residual_; }

 private:
  double time_;
  double dt_;
  double final_residual_;
};

class StationaryError : public Error {
 public:
  using Error::Error;
};

/// Config-file problem tied to a source line (0 when not line specific).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace memdd
