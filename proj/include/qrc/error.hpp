#pragma once

#include <stdexcept>
#include <string>

namespace qrc {

// Every failure raised by the library derives from Error so callers can map
// it to an exit code without caring about the stage that produced it.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside the mathematical domain of an operation (non-finite state,
// sinh overflow, zero-norm encoding).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Trajectory left the divergence box during integration.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, long step) : Error(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

// Inconsistent dimensions or parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Eigensolver failure, a state that violates density-matrix invariants, or a
// measurement with a non-negligible imaginary part.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

// Wraps a failure with the pipeline stage it happened in.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace qrc
