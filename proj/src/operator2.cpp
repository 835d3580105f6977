#include "cpecheck/operator2.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace cpecheck {
namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const Mat> view(const std::vector<double>& v, int n) { return {v.data(), n, n}; }

std::vector<double> euclidean(int n) {
  std::vector<double> g(static_cast<std::size_t>(n * n), 0.0);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i * n + i)] = 1.0;
  return g;
}

void check_compatible(const Operator2& a, const Operator2& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("operator dimension mismatch");
  if (a.metric() != b.metric()) throw std::invalid_argument("operators live over different metrics");
}

}  // namespace

Operator2::Operator2(int dim, std::vector<double> matrix, std::vector<double> metric)
    : dim_(dim), matrix_(std::move(matrix)), metric_(std::move(metric)) {
  const auto n2 = static_cast<std::size_t>(dim_) * static_cast<std::size_t>(dim_);
  if (dim_ < 1 || matrix_.size() != n2 || metric_.size() != n2) {
    throw std::invalid_argument("operator matrix and metric must be dim x dim");
  }
}

Operator2::Operator2(int dim, std::vector<double> matrix)
    : Operator2(dim, std::move(matrix), euclidean(dim)) {}

Operator2 Operator2::identity(int dim, std::vector<double> metric) {
  return Operator2(dim, euclidean(dim), std::move(metric));
}

double Operator2::trace() const { return view(matrix_, dim_).trace(); }

Operator2 Operator2::adjoint() const {
  const auto g = view(metric_, dim_);
  const Mat s = view(matrix_, dim_);
  const Mat adj = g.inverse() * s.transpose() * g;
  return Operator2(dim_, std::vector<double>(adj.data(), adj.data() + adj.size()), metric_);
}

double Operator2::inner(std::span<const double> x, std::span<const double> y) const {
  double acc = 0.0;
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) acc += x[static_cast<std::size_t>(i)] * metric_[static_cast<std::size_t>(i * dim_ + j)] * y[static_cast<std::size_t>(j)];
  }
  return acc;
}

std::vector<double> Operator2::apply(std::span<const double> x) const {
  std::vector<double> y(static_cast<std::size_t>(dim_), 0.0);
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) y[static_cast<std::size_t>(i)] += (*this)(i, j) * x[static_cast<std::size_t>(j)];
  }
  return y;
}

Operator2 operator+(const Operator2& a, const Operator2& b) {
  check_compatible(a, b);
  std::vector<double> m = a.matrix();
  for (std::size_t k = 0; k < m.size(); ++k) m[k] += b.matrix()[k];
  return Operator2(a.dim(), std::move(m), a.metric());
}

Operator2 operator-(const Operator2& a, const Operator2& b) {
  check_compatible(a, b);
  std::vector<double> m = a.matrix();
  for (std::size_t k = 0; k < m.size(); ++k) m[k] -= b.matrix()[k];
  return Operator2(a.dim(), std::move(m), a.metric());
}

Operator2 operator*(double s, const Operator2& a) {
  std::vector<double> m = a.matrix();
  for (auto& v : m) v *= s;
  return Operator2(a.dim(), std::move(m), a.metric());
}

Operator2 operator*(const Operator2& a, const Operator2& b) {
  check_compatible(a, b);
  const Mat p = view(a.matrix(), a.dim()) * view(b.matrix(), b.dim());
  return Operator2(a.dim(), std::vector<double>(p.data(), p.data() + p.size()), a.metric());
}

double hs_inner(const Operator2& s, const Operator2& t) {
  check_compatible(s, t);
  return (s * t.adjoint()).trace();
}

double hs_norm2(const Operator2& t) { return hs_inner(t, t); }

Operator2 traceless_part(const Operator2& t) {
  return t - (t.trace() / t.dim()) * Operator2::identity(t.dim(), t.metric());
}

}  // namespace cpecheck
