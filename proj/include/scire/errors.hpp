#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scire {

/// Argument outside the domain of a closed-form function (time, NSR value, label).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A configuration record failed validation. `field()` names the offending field.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Zero-width step handed to a difference quotient.
class DegenerateStepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation not defined for the requested combination of arguments.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Reference integration failed its self-consistency check.
class NotConvergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sampling step failed; carries the trajectory index of the failing step.
class StepError : public std::runtime_error {
 public:
  StepError(std::size_t step, const std::string& cause)
      : std::runtime_error("step " + std::to_string(step) + ": " + cause), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace scire
