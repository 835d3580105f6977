#include "cpecheck/finite_difference.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cpecheck {
namespace {

struct Stencil {
  int lo;                        // first offset
  std::array<double, 5> weight;  // weights for offsets lo, lo+1, ...
  int size;
};

// Second-order central stencils for the k-th derivative, unscaled by h^k.
const Stencil& stencil(int k) {
  static const std::array<Stencil, 5> table{{
      {0, {1.0}, 1},
      {-1, {-0.5, 0.0, 0.5}, 3},
      {-1, {1.0, -2.0, 1.0}, 3},
      {-2, {-0.5, 1.0, 0.0, -1.0, 0.5}, 5},
      {-2, {1.0, -4.0, 6.0, -4.0, 1.0}, 5},
  }};
  return table[static_cast<std::size_t>(k)];
}

class Sampler {
 public:
  Sampler(const std::function<double(const Point&)>& f, const Point& x, double h) : f_(f), x_(x), h_(h) {
    cache_.fill(std::numeric_limits<double>::quiet_NaN());
  }

  double at(const std::array<int, 4>& o) {
    const int key = (((o[0] + 2) * 5 + (o[1] + 2)) * 5 + (o[2] + 2)) * 5 + (o[3] + 2);
    double& slot = cache_[static_cast<std::size_t>(key)];
    if (std::isnan(slot)) {
      Point p = x_;
      for (int v = 0; v < 4; ++v) p[v] += h_ * o[v];
      slot = f_(p);
    }
    return slot;
  }

  /// Central-difference estimate of d^a f with this step.
  double partial(const MultiIndex& a) {
    double acc = 0.0;
    std::array<int, 4> off{};
    recurse(a, 0, 1.0, off, acc);
    int total = 0;
    for (int v : a) total += v;
    return acc / std::pow(h_, total);
  }

 private:
  void recurse(const MultiIndex& a, int axis, double w, std::array<int, 4>& off, double& acc) {
    if (axis == 4) {
      acc += w * at(off);
      return;
    }
    const Stencil& s = stencil(a[axis]);
    for (int i = 0; i < s.size; ++i) {
      const double wi = s.weight[static_cast<std::size_t>(i)];
      if (wi == 0.0) continue;
      off[axis] = s.lo + i;
      recurse(a, axis + 1, w * wi, off, acc);
    }
    off[axis] = 0;
  }

  const std::function<double(const Point&)>& f_;
  Point x_;
  double h_;
  std::array<double, 625> cache_{};
};

}  // namespace

Jet fd_jet(const std::function<double(const Point&)>& f, const Point& x, int order, double h) {
  if (order < 0 || order > kMaxJetOrder) throw std::invalid_argument("jet order must lie in [0, 4]");
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  Sampler coarse(f, x, h);
  Sampler fine(f, x, 0.5 * h);
  Jet j = Jet::zero(order);
  j.set_coefficient(0, coarse.at({0, 0, 0, 0}));
  for (int k = 1; k < jet_table::count_up_to(order); ++k) {
    const MultiIndex& a = jet_table::monomial(k);
    const double d = (4.0 * fine.partial(a) - coarse.partial(a)) / 3.0;
    j.set_coefficient(k, d / jet_table::factorial_weight(a));
  }
  return j;
}

}  // namespace cpecheck
