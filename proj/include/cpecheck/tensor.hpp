#pragma once

// Dense pointwise tensors with an explicit variance signature.
//
// Storage is row-major over the slots: entry (i0, i1, ..., i_{r-1}) lives at
// ((i0 * n + i1) * n + ...) + i_{r-1}. Every operation takes explicit slot
// positions; there is no implicit summation convention. The scalar type is
// double for point values and Jet for fields expanded around a point.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpecheck/jet.hpp"

namespace cpecheck {

enum class Slot : std::uint8_t { covariant, contravariant };
using Variance = std::vector<Slot>;

/// Symmetry tags that may be attached to a tensor and are validated on attach.
enum class Symmetry : std::uint8_t { none, symmetric2, antisymmetric2, riemann };

inline Variance covariant(int rank) { return Variance(static_cast<std::size_t>(rank), Slot::covariant); }
inline Variance contravariant(int rank) {
  return Variance(static_cast<std::size_t>(rank), Slot::contravariant);
}

inline double scalar_value(double x) { return x; }
inline double scalar_value(const Jet& x) { return x.value(); }

/// acc += a * b, without a temporary for jets.
inline void fma_into(double& acc, double a, double b) { acc += a * b; }
inline void fma_into(Jet& acc, const Jet& a, const Jet& b) { acc.add_product(a, b); }

template <class Scalar>
class BasicTensor {
 public:
  BasicTensor() = default;

  BasicTensor(int dim, Variance variance) : dim_(dim), variance_(std::move(variance)) {
    check_dim(dim_);
    entries_.assign(power(dim_, rank()), Scalar{});
  }

  BasicTensor(int dim, Variance variance, std::vector<Scalar> entries)
      : dim_(dim), variance_(std::move(variance)), entries_(std::move(entries)) {
    check_dim(dim_);
    if (entries_.size() != power(dim_, rank())) {
      throw std::invalid_argument("tensor entries must have length dim^rank (expected " +
                                  std::to_string(power(dim_, rank())) + ", got " +
                                  std::to_string(entries_.size()) + ")");
    }
  }

  int dim() const noexcept { return dim_; }
  int rank() const noexcept { return static_cast<int>(variance_.size()); }
  const Variance& variance() const noexcept { return variance_; }
  Slot slot(int i) const { return variance_.at(static_cast<std::size_t>(i)); }
  std::size_t size() const noexcept { return entries_.size(); }
  Symmetry symmetry() const noexcept { return symmetry_; }

  std::span<Scalar> entries() noexcept { return entries_; }
  std::span<const Scalar> entries() const noexcept { return entries_; }

  template <class... I>
  Scalar& operator()(I... idx) {
    return entries_[offset_of(idx...)];
  }
  template <class... I>
  const Scalar& operator()(I... idx) const {
    return entries_[offset_of(idx...)];
  }

  Scalar& at(std::span<const int> idx) { return entries_[offset(idx)]; }
  const Scalar& at(std::span<const int> idx) const { return entries_[offset(idx)]; }

  std::size_t offset(std::span<const int> idx) const {
    if (static_cast<int>(idx.size()) != rank()) throw std::invalid_argument("index rank mismatch");
    std::size_t off = 0;
    for (int i : idx) {
      if (i < 0 || i >= dim_) throw std::invalid_argument("index out of range");
      off = off * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
    }
    return off;
  }

  /// Decodes a flat offset into slot indices.
  void unflatten(std::size_t off, std::span<int> idx) const {
    for (int s = rank() - 1; s >= 0; --s) {
      idx[static_cast<std::size_t>(s)] = static_cast<int>(off % static_cast<std::size_t>(dim_));
      off /= static_cast<std::size_t>(dim_);
    }
  }

  static std::size_t power(int dim, int rank) {
    std::size_t p = 1;
    for (int i = 0; i < rank; ++i) p *= static_cast<std::size_t>(dim);
    return p;
  }

  /// Validates and tags a symmetry; throws std::invalid_argument when it is
  /// violated beyond 1e-12 relative.
  BasicTensor& with_symmetry(Symmetry s);

  BasicTensor& operator+=(const BasicTensor& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += o.entries_[k];
    symmetry_ = Symmetry::none;
    return *this;
  }
  BasicTensor& operator-=(const BasicTensor& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= o.entries_[k];
    symmetry_ = Symmetry::none;
    return *this;
  }
  BasicTensor& operator*=(double s) {
    for (auto& e : entries_) e *= s;
    return *this;
  }

  void check_same_shape(const BasicTensor& o) const {
    if (dim_ != o.dim_ || variance_ != o.variance_) {
      throw std::invalid_argument("tensor shape/variance mismatch");
    }
  }

 private:
  static void check_dim(int dim) {
    if (dim < 1 || dim > 8) throw std::invalid_argument("tensor dimension must lie in [1, 8]");
  }

  template <class... I>
  std::size_t offset_of(I... idx) const {
    std::size_t off = 0;
    ((off = off * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(idx)), ...);
    return off;
  }

  int dim_ = 0;
  Variance variance_;
  std::vector<Scalar> entries_;
  Symmetry symmetry_ = Symmetry::none;
};

using TensorValue = BasicTensor<double>;
using TensorJet = BasicTensor<Jet>;

template <class Scalar>
BasicTensor<Scalar> operator+(BasicTensor<Scalar> a, const BasicTensor<Scalar>& b) {
  return a += b;
}
template <class Scalar>
BasicTensor<Scalar> operator-(BasicTensor<Scalar> a, const BasicTensor<Scalar>& b) {
  return a -= b;
}
template <class Scalar>
BasicTensor<Scalar> operator*(double s, BasicTensor<Scalar> a) {
  return a *= s;
}

/// Frobenius norm of the stored components (coordinate-dependent unless the
/// components are taken in an orthonormal frame).
template <class Scalar>
double component_norm(const BasicTensor<Scalar>& t) {
  double s = 0.0;
  for (const auto& e : t.entries()) {
    const double v = scalar_value(e);
    s += v * v;
  }
  return std::sqrt(s);
}

/// Largest absolute component.
template <class Scalar>
double max_abs(const BasicTensor<Scalar>& t) {
  double m = 0.0;
  for (const auto& e : t.entries()) m = std::max(m, std::abs(scalar_value(e)));
  return m;
}

/// Point values of a jet-valued tensor.
TensorValue value_of(const TensorJet& t);

/// Tensor (outer) product; slots of `a` first.
template <class Scalar>
BasicTensor<Scalar> outer(const BasicTensor<Scalar>& a, const BasicTensor<Scalar>& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("outer: dimension mismatch");
  Variance v = a.variance();
  v.insert(v.end(), b.variance().begin(), b.variance().end());
  BasicTensor<Scalar> r(a.dim(), std::move(v));
  const std::size_t nb = b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < nb; ++j) r.entries()[i * nb + j] = a.entries()[i] * b.entries()[j];
  }
  return r;
}

/// Contracts slots a and b. When both slots carry the same variance a metric
/// of the opposite variance must be supplied (g^{-1} for two covariant slots,
/// g for two contravariant slots). The remaining slots keep their order.
template <class Scalar>
BasicTensor<Scalar> contract(const BasicTensor<Scalar>& t, int slot_a, int slot_b,
                             const BasicTensor<Scalar>* metric = nullptr) {
  const int r = t.rank();
  if (slot_a < 0 || slot_b < 0 || slot_a >= r || slot_b >= r) {
    throw std::invalid_argument("contract: slot out of range");
  }
  if (slot_a == slot_b) throw std::invalid_argument("contract: slots must be distinct");
  if (slot_a > slot_b) std::swap(slot_a, slot_b);
  const int n = t.dim();
  const bool same = t.slot(slot_a) == t.slot(slot_b);
  if (same) {
    if (metric == nullptr) throw std::invalid_argument("contract: metric required for equal-variance slots");
    const Slot need = t.slot(slot_a) == Slot::covariant ? Slot::contravariant : Slot::covariant;
    if (metric->rank() != 2 || metric->dim() != n || metric->slot(0) != need || metric->slot(1) != need) {
      throw std::invalid_argument("contract: metric has the wrong variance or dimension");
    }
  }
  Variance rv;
  for (int s = 0; s < r; ++s) {
    if (s != slot_a && s != slot_b) rv.push_back(t.slot(s));
  }
  BasicTensor<Scalar> out(n, std::move(rv));
  std::vector<int> oidx(static_cast<std::size_t>(r - 2));
  std::vector<int> idx(static_cast<std::size_t>(r));
  for (std::size_t o = 0; o < out.size(); ++o) {
    if (r > 2) out.unflatten(o, oidx);
    for (int s = 0, k = 0; s < r; ++s) {
      if (s != slot_a && s != slot_b) idx[static_cast<std::size_t>(s)] = oidx[static_cast<std::size_t>(k++)];
    }
    Scalar acc{};
    for (int i = 0; i < n; ++i) {
      idx[static_cast<std::size_t>(slot_a)] = i;
      if (same) {
        for (int j = 0; j < n; ++j) {
          idx[static_cast<std::size_t>(slot_b)] = j;
          fma_into(acc, (*metric)(i, j), t.at(idx));
        }
      } else {
        idx[static_cast<std::size_t>(slot_b)] = i;
        acc += t.at(idx);
      }
    }
    out.entries()[o] = acc;
  }
  return out;
}

namespace detail {

template <class Scalar>
BasicTensor<Scalar> apply_metric(const BasicTensor<Scalar>& t, int slot, const BasicTensor<Scalar>& m,
                                 Slot from, Slot to) {
  if (slot < 0 || slot >= t.rank()) throw std::invalid_argument("slot out of range");
  if (t.slot(slot) != from) throw std::invalid_argument("slot has the wrong variance");
  const Slot need = to == Slot::contravariant ? Slot::contravariant : Slot::covariant;
  if (m.rank() != 2 || m.dim() != t.dim() || m.slot(0) != need || m.slot(1) != need) {
    throw std::invalid_argument("metric has the wrong variance or dimension");
  }
  Variance v = t.variance();
  v[static_cast<std::size_t>(slot)] = to;
  BasicTensor<Scalar> out(t.dim(), std::move(v));
  const int n = t.dim();
  std::size_t stride = 1;
  for (int s = t.rank() - 1; s > slot; --s) stride *= static_cast<std::size_t>(n);
  for (std::size_t o = 0; o < out.size(); ++o) {
    const int i = static_cast<int>((o / stride) % static_cast<std::size_t>(n));
    const std::size_t base = o - static_cast<std::size_t>(i) * stride;
    Scalar acc{};
    for (int j = 0; j < n; ++j) fma_into(acc, m(i, j), t.entries()[base + static_cast<std::size_t>(j) * stride]);
    out.entries()[o] = acc;
  }
  return out;
}

}  // namespace detail

/// Raises a covariant slot with the inverse metric (a (2,0) tensor).
template <class Scalar>
BasicTensor<Scalar> raise(const BasicTensor<Scalar>& t, int slot, const BasicTensor<Scalar>& inverse_metric) {
  return detail::apply_metric(t, slot, inverse_metric, Slot::covariant, Slot::contravariant);
}

/// Lowers a contravariant slot with the metric (a (0,2) tensor).
template <class Scalar>
BasicTensor<Scalar> lower(const BasicTensor<Scalar>& t, int slot, const BasicTensor<Scalar>& metric) {
  return detail::apply_metric(t, slot, metric, Slot::contravariant, Slot::covariant);
}

/// Raises every covariant slot.
template <class Scalar>
BasicTensor<Scalar> raise_all(BasicTensor<Scalar> t, const BasicTensor<Scalar>& inverse_metric) {
  for (int s = 0; s < t.rank(); ++s) {
    if (t.slot(s) == Slot::covariant) t = raise(t, s, inverse_metric);
  }
  return t;
}

/// Reorders slots: result slot k is input slot perm[k].
template <class Scalar>
BasicTensor<Scalar> permute(const BasicTensor<Scalar>& t, std::span<const int> perm) {
  const int r = t.rank();
  if (static_cast<int>(perm.size()) != r) throw std::invalid_argument("permute: wrong length");
  Variance v(static_cast<std::size_t>(r));
  for (int k = 0; k < r; ++k) v[static_cast<std::size_t>(k)] = t.slot(perm[static_cast<std::size_t>(k)]);
  BasicTensor<Scalar> out(t.dim(), std::move(v));
  std::vector<int> oidx(static_cast<std::size_t>(r)), iidx(static_cast<std::size_t>(r));
  for (std::size_t o = 0; o < out.size(); ++o) {
    out.unflatten(o, oidx);
    for (int k = 0; k < r; ++k) iidx[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])] = oidx[static_cast<std::size_t>(k)];
    out.entries()[o] = t.at(iidx);
  }
  return out;
}

/// (T + T with slots a, b swapped) / 2.
template <class Scalar>
BasicTensor<Scalar> symmetrize(const BasicTensor<Scalar>& t, int a, int b) {
  std::vector<int> perm(static_cast<std::size_t>(t.rank()));
  for (int k = 0; k < t.rank(); ++k) perm[static_cast<std::size_t>(k)] = k;
  std::swap(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]);
  BasicTensor<Scalar> out = t + permute(t, perm);
  return out *= 0.5;
}

template <class Scalar>
BasicTensor<Scalar> antisymmetrize(const BasicTensor<Scalar>& t, int a, int b) {
  std::vector<int> perm(static_cast<std::size_t>(t.rank()));
  for (int k = 0; k < t.rank(); ++k) perm[static_cast<std::size_t>(k)] = k;
  std::swap(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]);
  BasicTensor<Scalar> out = t - permute(t, perm);
  return out *= 0.5;
}

/// Full metric inner product <a, b>_g of two tensors with equal variance.
double metric_inner(const TensorValue& a, const TensorValue& b, const TensorValue& metric,
                    const TensorValue& inverse_metric);
double metric_norm(const TensorValue& t, const TensorValue& metric, const TensorValue& inverse_metric);

/// Largest violation of the given symmetry, relative to max(1, max|T|).
double symmetry_violation(const TensorValue& t, Symmetry s);

/// The (0,2) metric and (2,0) inverse as tensors from plain matrices.
TensorValue metric_tensor(int dim, std::span<const double> row_major);
TensorValue inverse_of(const TensorValue& metric);

template <class Scalar>
BasicTensor<Scalar>& BasicTensor<Scalar>::with_symmetry(Symmetry s) {
  if constexpr (std::is_same_v<Scalar, double>) {
    if (symmetry_violation(*this, s) > 1e-12) {
      throw std::invalid_argument("tensor violates its declared symmetry");
    }
  }
  symmetry_ = s;
  return *this;
}

}  // namespace cpecheck
