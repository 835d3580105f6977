#pragma once

#include <stdexcept>
#include <string>

namespace cpecheck {

// Error taxonomy. Argument problems use std::invalid_argument directly.

/// A chart point outside the open domain of a field.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An expression node that cannot be evaluated (or differentiated) at a point,
/// e.g. sqrt at 0, log of a non-positive value, division by zero.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The metric is singular or not positive definite at the point.
class DegenerateMetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A derivative was requested beyond the available jet order.
class OrderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// |grad f| is below the regular-point threshold.
class CriticalPointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input tensor violates a required symmetry beyond tolerance.
class InconsistentInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Expression text that does not match the grammar. Column is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t column, const std::string& message)
      : std::runtime_error("column " + std::to_string(column) + ": " + message),
        column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

}  // namespace cpecheck
