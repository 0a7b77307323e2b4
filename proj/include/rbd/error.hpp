#pragma once

#include <stdexcept>
#include <string>

namespace rbd {

/// Argument outside the mathematical domain of an operation
/// (negative rate, negative time, probability outside [0, 1], ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A model that fails validation was passed to an evaluator.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lookup of an instance that is not present in a model or state.
class UnknownInstanceError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace rbd
