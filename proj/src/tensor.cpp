#include "cpecheck/tensor.hpp"

#include <Eigen/Dense>

namespace cpecheck {

TensorValue value_of(const TensorJet& t) {
  TensorValue out(t.dim(), t.variance());
  for (std::size_t k = 0; k < t.size(); ++k) out.entries()[k] = t.entries()[k].value();
  return out;
}

double metric_inner(const TensorValue& a, const TensorValue& b, const TensorValue& metric,
                    const TensorValue& inverse_metric) {
  a.check_same_shape(b);
  // bring `b` to the opposite variance of `a` slot by slot, then pair entries
  TensorValue dual = b;
  for (int s = 0; s < b.rank(); ++s) {
    dual = b.slot(s) == Slot::covariant ? raise(dual, s, inverse_metric) : lower(dual, s, metric);
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a.entries()[k] * dual.entries()[k];
  return acc;
}

double metric_norm(const TensorValue& t, const TensorValue& metric, const TensorValue& inverse_metric) {
  return std::sqrt(std::max(0.0, metric_inner(t, t, metric, inverse_metric)));
}

double symmetry_violation(const TensorValue& t, Symmetry s) {
  const double scale = std::max(1.0, max_abs(t));
  const int n = t.dim();
  double worst = 0.0;
  switch (s) {
    case Symmetry::none: return 0.0;
    case Symmetry::symmetric2:
    case Symmetry::antisymmetric2: {
      if (t.rank() != 2) throw std::invalid_argument("two-slot symmetry on a tensor of rank != 2");
      const double sign = s == Symmetry::symmetric2 ? 1.0 : -1.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) worst = std::max(worst, std::abs(t(i, j) - sign * t(j, i)));
      }
      break;
    }
    case Symmetry::riemann: {
      if (t.rank() != 4) throw std::invalid_argument("riemann symmetry on a tensor of rank != 4");
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          for (int k = 0; k < n; ++k) {
            for (int l = 0; l < n; ++l) {
              const double v = t(i, j, k, l);
              worst = std::max({worst, std::abs(v + t(j, i, k, l)), std::abs(v + t(i, j, l, k)),
                                std::abs(v - t(k, l, i, j)),
                                std::abs(v + t(j, k, i, l) + t(k, i, j, l))});
            }
          }
        }
      }
      break;
    }
  }
  return worst / scale;
}

TensorValue metric_tensor(int dim, std::span<const double> row_major) {
  return TensorValue(dim, covariant(2), std::vector<double>(row_major.begin(), row_major.end()));
}

TensorValue inverse_of(const TensorValue& metric) {
  if (metric.rank() != 2) throw std::invalid_argument("inverse_of: rank-2 tensor required");
  const int n = metric.dim();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = metric(i, j);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) throw std::invalid_argument("inverse_of: singular tensor");
  const Eigen::MatrixXd inv = lu.inverse();
  const Slot flipped = metric.slot(0) == Slot::covariant ? Slot::contravariant : Slot::covariant;
  TensorValue out(n, Variance{flipped, flipped});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out(i, j) = inv(i, j);
  }
  return out;
}

}  // namespace cpecheck
