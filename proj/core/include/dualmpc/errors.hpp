#pragma once

#include <stdexcept>
#include <string>

namespace dualmpc {

/// Observation evaluated at (or numerically at) the landmark position.
class SingularObservation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Damped normal equations could not be solved to a finite step.
class LinearSolveFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotSymmetric : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A check that needs the full-solve oracle columns was given a trace without them.
class MissingOracle : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace dualmpc
