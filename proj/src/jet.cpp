#include "cpecheck/jet.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cpecheck/errors.hpp"

namespace cpecheck {
namespace {

struct ProductTerm {
  std::uint8_t lhs, rhs, out;
};

struct Tables {
  std::array<MultiIndex, kJetSize> monomials{};
  std::array<int, kJetSize> degrees{};
  std::array<int, 625> lookup{};  // base-5 encoding of exponents
  std::array<int, kMaxJetOrder + 1> count{};
  std::vector<ProductTerm> products;  // sorted by degree of `out`
  std::array<int, kMaxJetOrder + 1> products_end{};
  // raise[v][k]: index of monomial k + e_v, or -1.
  std::array<std::array<int, kJetSize>, kJetVars> raise{};

  static int encode(const MultiIndex& a) {
    return ((a[0] * 5 + a[1]) * 5 + a[2]) * 5 + a[3];
  }

  Tables() {
    lookup.fill(-1);
    int k = 0;
    for (int d = 0; d <= kMaxJetOrder; ++d) {
      // graded lex: within degree d, larger leading exponents first
      for (int a0 = d; a0 >= 0; --a0) {
        for (int a1 = d - a0; a1 >= 0; --a1) {
          for (int a2 = d - a0 - a1; a2 >= 0; --a2) {
            const int a3 = d - a0 - a1 - a2;
            monomials[k] = {a0, a1, a2, a3};
            degrees[k] = d;
            lookup[encode(monomials[k])] = k;
            ++k;
          }
        }
      }
      count[d] = k;
    }
    for (int out_degree = 0; out_degree <= kMaxJetOrder; ++out_degree) {
      for (int i = 0; i < kJetSize; ++i) {
        for (int j = 0; j < kJetSize; ++j) {
          if (degrees[i] + degrees[j] != out_degree) continue;
          MultiIndex s{};
          for (int v = 0; v < kJetVars; ++v) s[v] = monomials[i][v] + monomials[j][v];
          products.push_back({static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(j),
                              static_cast<std::uint8_t>(lookup[encode(s)])});
        }
      }
      products_end[out_degree] = static_cast<int>(products.size());
    }
    for (int v = 0; v < kJetVars; ++v) {
      for (int i = 0; i < kJetSize; ++i) {
        MultiIndex a = monomials[i];
        ++a[v];
        raise[v][i] = degrees[i] < kMaxJetOrder ? lookup[encode(a)] : -1;
      }
    }
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

Jet with_order(int order) { return Jet::zero(order); }

}  // namespace

namespace jet_table {

int count_up_to(int order) {
  if (order < 0) return 0;
  return tables().count[std::min(order, kMaxJetOrder)];
}
const MultiIndex& monomial(int k) { return tables().monomials[k]; }
int degree(int k) { return tables().degrees[k]; }
int index_of(const MultiIndex& a) {
  int d = 0;
  for (int v : a) {
    if (v < 0) return -1;
    d += v;
  }
  if (d > kMaxJetOrder) return -1;
  return tables().lookup[Tables::encode(a)];
}
double factorial_weight(const MultiIndex& a) {
  double w = 1.0;
  for (int v : a) {
    for (int i = 2; i <= v; ++i) w *= i;
  }
  return w;
}

}  // namespace jet_table

Jet Jet::constant(double c) {
  Jet j;
  j.c_[0] = c;
  return j;
}

Jet Jet::variable(int v, double at) {
  Jet j;
  j.c_[0] = at;
  j.c_[1 + v] = 1.0;
  return j;
}

Jet Jet::zero(int order) {
  Jet j;
  j.order_ = std::clamp(order, 0, kMaxJetOrder);
  return j;
}

double Jet::coefficient(const MultiIndex& a) const {
  const int k = jet_table::index_of(a);
  if (k < 0 || jet_table::degree(k) > order_) {
    throw OrderError("jet coefficient requested beyond jet order " + std::to_string(order_));
  }
  return c_[k];
}

double Jet::partial(const MultiIndex& a) const {
  return coefficient(a) * jet_table::factorial_weight(a);
}

Jet Jet::derivative(int v) const {
  if (order_ < 1) throw OrderError("cannot differentiate an order-0 jet");
  const auto& t = tables();
  Jet r = with_order(order_ - 1);
  const int n = t.count[order_ - 1];
  for (int k = 0; k < n; ++k) {
    const int src = t.raise[v][k];
    r.c_[k] = c_[src] * static_cast<double>(t.monomials[src][v]);
  }
  return r;
}

Jet Jet::truncated(int order) const {
  Jet r = *this;
  r.order_ = std::clamp(std::min(order, order_), 0, kMaxJetOrder);
  std::fill(r.c_.begin() + tables().count[r.order_], r.c_.end(), 0.0);
  return r;
}

Jet& Jet::operator+=(const Jet& o) {
  order_ = std::min(order_, o.order_);
  const int n = tables().count[order_];
  for (int k = 0; k < n; ++k) c_[k] += o.c_[k];
  std::fill(c_.begin() + n, c_.end(), 0.0);
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  order_ = std::min(order_, o.order_);
  const int n = tables().count[order_];
  for (int k = 0; k < n; ++k) c_[k] -= o.c_[k];
  std::fill(c_.begin() + n, c_.end(), 0.0);
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  *this = *this * o;
  return *this;
}

Jet& Jet::operator+=(double s) noexcept {
  c_[0] += s;
  return *this;
}

Jet& Jet::operator-=(double s) noexcept {
  c_[0] -= s;
  return *this;
}

Jet& Jet::operator*=(double s) noexcept {
  const int n = tables().count[order_];
  for (int k = 0; k < n; ++k) c_[k] *= s;
  return *this;
}

Jet& Jet::operator/=(double s) {
  if (s == 0.0) throw EvaluationError("jet division by zero");
  return *this *= (1.0 / s);
}

void Jet::add_product(const Jet& a, const Jet& b) {
  const auto& t = tables();
  const int order = std::min({order_, a.order_, b.order_});
  if (order < order_) {
    std::fill(c_.begin() + t.count[order], c_.end(), 0.0);
    order_ = order;
  }
  const int end = t.products_end[order];
  for (int p = 0; p < end; ++p) {
    const ProductTerm& term = t.products[p];
    c_[term.out] += a.c_[term.lhs] * b.c_[term.rhs];
  }
}

void Jet::add_product(const Jet& a, const Jet& b, double s) {
  const auto& t = tables();
  const int order = std::min({order_, a.order_, b.order_});
  if (order < order_) {
    std::fill(c_.begin() + t.count[order], c_.end(), 0.0);
    order_ = order;
  }
  const int end = t.products_end[order];
  for (int p = 0; p < end; ++p) {
    const ProductTerm& term = t.products[p];
    c_[term.out] += s * a.c_[term.lhs] * b.c_[term.rhs];
  }
}

Jet Jet::operator-() const {
  Jet r = *this;
  r *= -1.0;
  return r;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator*(const Jet& a, const Jet& b) {
  Jet r = with_order(std::min(a.order(), b.order()));
  r.add_product(a, b);
  return r;
}
Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
Jet operator+(Jet a, double s) { return a += s; }
Jet operator+(double s, Jet a) { return a += s; }
Jet operator-(Jet a, double s) { return a -= s; }
Jet operator-(double s, const Jet& a) { return -a + s; }
Jet operator*(Jet a, double s) { return a *= s; }
Jet operator*(double s, Jet a) { return a *= s; }
Jet operator/(Jet a, double s) { return a /= s; }
Jet operator/(double s, const Jet& a) { return reciprocal(a) * s; }

Jet compose(const Jet& x, std::span<const double> taylor) {
  Jet delta = x;
  delta.set_coefficient(0, 0.0);
  const int terms = std::min<int>(x.order(), static_cast<int>(taylor.size()) - 1);
  Jet r = Jet::zero(x.order());
  r.set_coefficient(0, taylor[terms]);
  for (int k = terms - 1; k >= 0; --k) {
    r = r * delta;
    r += taylor[k];
  }
  return r;
}

Jet reciprocal(const Jet& x) {
  const double x0 = x.value();
  if (x0 == 0.0) throw EvaluationError("division by zero");
  std::array<double, kMaxJetOrder + 1> t{};
  double p = 1.0 / x0;
  for (int k = 0; k <= kMaxJetOrder; ++k) {
    t[k] = (k % 2 == 0 ? 1.0 : -1.0) * p;
    p /= x0;
  }
  return compose(x, t);
}

Jet exp(const Jet& x) {
  std::array<double, kMaxJetOrder + 1> t{};
  double e = std::exp(x.value());
  double fact = 1.0;
  for (int k = 0; k <= kMaxJetOrder; ++k) {
    if (k > 0) fact *= k;
    t[k] = e / fact;
  }
  return compose(x, t);
}

Jet log(const Jet& x) {
  const double x0 = x.value();
  if (!(x0 > 0.0)) throw EvaluationError("log of a non-positive value");
  std::array<double, kMaxJetOrder + 1> t{};
  t[0] = std::log(x0);
  double p = 1.0;
  for (int k = 1; k <= kMaxJetOrder; ++k) {
    p /= x0;
    t[k] = (k % 2 == 1 ? 1.0 : -1.0) * p / k;
  }
  return compose(x, t);
}

Jet sin(const Jet& x) {
  const double s = std::sin(x.value());
  const double c = std::cos(x.value());
  const std::array<double, 4> cycle{s, c, -s, -c};
  std::array<double, kMaxJetOrder + 1> t{};
  double fact = 1.0;
  for (int k = 0; k <= kMaxJetOrder; ++k) {
    if (k > 0) fact *= k;
    t[k] = cycle[k % 4] / fact;
  }
  return compose(x, t);
}

Jet cos(const Jet& x) {
  const double s = std::sin(x.value());
  const double c = std::cos(x.value());
  const std::array<double, 4> cycle{c, -s, -c, s};
  std::array<double, kMaxJetOrder + 1> t{};
  double fact = 1.0;
  for (int k = 0; k <= kMaxJetOrder; ++k) {
    if (k > 0) fact *= k;
    t[k] = cycle[k % 4] / fact;
  }
  return compose(x, t);
}

Jet sqrt(const Jet& x) {
  const double x0 = x.value();
  if (x0 < 0.0) throw EvaluationError("sqrt of a negative value");
  if (x0 == 0.0) {
    if (x.order() == 0) return Jet::zero(0);
    throw EvaluationError("sqrt is not differentiable at 0");
  }
  return pow(x, 0.5);
}

Jet pow(const Jet& x, int n) {
  if (n < 0) return reciprocal(pow(x, -n));
  Jet result = Jet::constant(1.0);
  Jet base = x;
  bool first = true;
  while (n > 0) {
    if (n & 1) {
      result = first ? base : result * base;
      first = false;
    }
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

Jet pow(const Jet& x, double p) {
  if (p == std::floor(p) && std::abs(p) <= 64.0) return pow(x, static_cast<int>(p));
  const double x0 = x.value();
  if (!(x0 > 0.0)) throw EvaluationError("non-integer power of a non-positive value");
  // generalized binomial series: t_k = C(p, k) x0^(p - k)
  std::array<double, kMaxJetOrder + 1> t{};
  double binom = 1.0;
  for (int k = 0; k <= kMaxJetOrder; ++k) {
    if (k > 0) binom *= (p - (k - 1)) / k;
    t[k] = binom * std::pow(x0, p - k);
  }
  return compose(x, t);
}

}  // namespace cpecheck
