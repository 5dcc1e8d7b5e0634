#pragma once

#include <stdexcept>
#include <string>

namespace tpl {

/// Shape disagreement between matrices, fields, or chains.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An iterative numerical routine failed to converge.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// A model violates its structural invariants (generator rows, reversibility, regularity).
struct ModelError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Exact enumeration would exceed the state-count budget.
struct CapacityError : std::length_error {
  using std::length_error::length_error;
};

/// Monte Carlo input refused (e.g. an estimated variance proxy with no certificate).
struct RefusalError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace tpl
