#pragma once

#include <stdexcept>
#include <string>

namespace magstab {

/// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (non-unit quaternion, T <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical method failed to produce a certified result.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// The sampled-data design cannot be completed for the given orbit / gains / period.
class DesignFailure : public Error {
 public:
  using Error::Error;
};

/// Scenario input is malformed or violates an invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Closed-loop simulation left the admissible state region.
class SimulationDivergence : public Error {
 public:
  SimulationDivergence(const std::string& what, double last_valid_time)
      : Error(what), last_valid_time_(last_valid_time) {}

  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

}  // namespace magstab
