#pragma once

// Scalar and metric fields on a coordinate box, and their derivative jets.

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "cpecheck/expr.hpp"
#include "cpecheck/tensor.hpp"

namespace cpecheck {

/// How derivatives are obtained: Taylor-mode arithmetic on the expression
/// tree, or nested central differences with Richardson extrapolation.
enum class JetMode : std::uint8_t { taylor, fd };

std::string to_string(JetMode m);
JetMode jet_mode_from_string(const std::string& s);

/// Declared accuracy of a derivative of the given total order.
double jet_tolerance(JetMode mode, int derivative_order);

/// Open box in R^4 (infinite bounds allowed). Only the first `dim` axes are
/// meaningful for a field of lower dimension.
struct Box {
  std::array<double, 4> lo{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  std::array<double, 4> hi{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};

  static Box whole();
  static Box cube(double lo, double hi);
  bool contains(const Point& x, int dim = 4) const;
  Box intersect(const Box& o) const;
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(Expr e, Box domain = Box::whole()) : expr_(std::move(e)), domain_(domain) {}

  const Expr& expr() const noexcept { return expr_; }
  const Box& domain() const noexcept { return domain_; }
  /// Throws DomainError outside the domain.
  double operator()(const Point& x) const;

 private:
  Expr expr_;
  Box domain_;
};

class MetricField {
 public:
  MetricField() = default;
  /// `components` is the row-major dim x dim array; it must be symmetric as
  /// expressions are compared by identity, so callers pass the upper triangle
  /// mirrored (see from_upper).
  MetricField(int dim, std::vector<Expr> components, Box domain = Box::whole());
  /// Builds a symmetric metric from the dim*(dim+1)/2 upper-triangle entries,
  /// row by row.
  static MetricField from_upper(int dim, const std::vector<Expr>& upper, Box domain = Box::whole());
  /// exp(2 phi) * delta on R^dim.
  static MetricField conformally_flat(int dim, const Expr& phi, Box domain = Box::whole());

  int dim() const noexcept { return dim_; }
  const Box& domain() const noexcept { return domain_; }
  const Expr& component(int i, int j) const { return components_[static_cast<std::size_t>(i * dim_ + j)]; }

  /// Component values at a point (throws DomainError outside the domain).
  TensorValue at(const Point& x) const;
  /// True when the metric is positive definite at every given point.
  bool positive_definite_at(const std::vector<Point>& points) const;

 private:
  int dim_ = 0;
  std::vector<Expr> components_;
  Box domain_;
};

/// Jet of a scalar field at a point, to total order `order` (<= 4).
Jet scalar_jet(const ScalarField& f, const Point& x, int order, JetMode mode = JetMode::taylor);

/// Componentwise jets of the metric as a (0,2) jet tensor. Symmetry in (i, j)
/// holds exactly: only the upper triangle is evaluated.
TensorJet metric_jet(const MetricField& g, const Point& x, int order, JetMode mode = JetMode::taylor);

}  // namespace cpecheck
