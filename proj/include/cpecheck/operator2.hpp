#pragma once

// Endomorphisms of an inner-product space (T_pM with g at the point).

#include <vector>

#include "cpecheck/tensor.hpp"

namespace cpecheck {

/// A linear operator S^i_j acting on column vectors, together with the
/// metric g_ij at the base point that defines adjoints.
class Operator2 {
 public:
  Operator2(int dim, std::vector<double> matrix, std::vector<double> metric);
  /// Operator with the Euclidean metric.
  Operator2(int dim, std::vector<double> matrix);

  static Operator2 identity(int dim, std::vector<double> metric);

  int dim() const noexcept { return dim_; }
  double operator()(int i, int j) const { return matrix_[static_cast<std::size_t>(i * dim_ + j)]; }
  const std::vector<double>& matrix() const noexcept { return matrix_; }
  const std::vector<double>& metric() const noexcept { return metric_; }

  double trace() const;
  /// Metric adjoint S* = g^{-1} S^T g, so that <Sx, y>_g = <x, S* y>_g.
  Operator2 adjoint() const;
  /// g(x, y) for column vectors.
  double inner(std::span<const double> x, std::span<const double> y) const;
  std::vector<double> apply(std::span<const double> x) const;

 private:
  int dim_;
  std::vector<double> matrix_;
  std::vector<double> metric_;
};

Operator2 operator+(const Operator2& a, const Operator2& b);
Operator2 operator-(const Operator2& a, const Operator2& b);
Operator2 operator*(double s, const Operator2& a);
/// Composition a∘b.
Operator2 operator*(const Operator2& a, const Operator2& b);

/// Hilbert–Schmidt inner product tr(S T*).
double hs_inner(const Operator2& s, const Operator2& t);
double hs_norm2(const Operator2& t);

/// T - (tr T / n) I.
Operator2 traceless_part(const Operator2& t);

}  // namespace cpecheck
