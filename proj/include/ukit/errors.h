#ifndef UKIT_ERRORS_H_
#define UKIT_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ukit {

// Base of every error the toolkit throws. The CLI maps config-like errors to
// exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or inconsistent user configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Tensor or vector extents do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// An operation was invoked out of order (e.g. backward before forward).
class StateError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Too few samples to compute a statistic.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// A referenced artifact (checkpoint, split, run) could not be found.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

// Non-finite value during training; `step` is the optimizer step index.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, long step = -1)
      : Error(step >= 0 ? what + " (step " + std::to_string(step) + ")" : what),
        step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

}  // namespace ukit

#endif  // UKIT_ERRORS_H_
