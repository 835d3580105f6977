#pragma once

// Truncated multivariate Taylor polynomials in the four chart coordinates.
//
// A Jet stores the Taylor coefficients c_a of a function around a base point,
//     f(p + dx) = sum_{|a| <= order} c_a dx^a,
// so the partial derivative d^a f(p) equals a! * c_a. Monomials are stored in
// graded lexicographic order: degree 0 first, then the 4 linear terms, etc.
// Arithmetic truncates at the smaller order of the two operands, so a jet
// derived from a field known to order k never claims more than k.

#include <array>
#include <cstdint>
#include <span>

namespace cpecheck {

inline constexpr int kJetVars = 4;
inline constexpr int kMaxJetOrder = 4;
inline constexpr int kJetSize = 70;  // C(4 + 4, 4)

using MultiIndex = std::array<int, kJetVars>;

namespace jet_table {

/// Number of monomials of total degree <= order (1, 5, 15, 35, 70).
int count_up_to(int order);
const MultiIndex& monomial(int k);
int degree(int k);
/// Position of a monomial, or -1 if its degree exceeds kMaxJetOrder.
int index_of(const MultiIndex& a);
/// Product of factorials a_1! ... a_4!.
double factorial_weight(const MultiIndex& a);

}  // namespace jet_table

class Jet {
 public:
  /// The exact zero function.
  Jet() noexcept = default;

  static Jet constant(double c);
  /// The coordinate function x_v expanded around x_v = at.
  static Jet variable(int v, double at);
  /// Zero polynomial with a declared truncation order.
  static Jet zero(int order);

  int order() const noexcept { return order_; }
  double value() const noexcept { return c_[0]; }
  double coefficient(int k) const { return c_[k]; }
  double coefficient(const MultiIndex& a) const;
  void set_coefficient(int k, double v) { c_[k] = v; }
  /// d^a f at the base point.
  double partial(const MultiIndex& a) const;

  /// Partial derivative with respect to coordinate v; order drops by one.
  Jet derivative(int v) const;
  Jet truncated(int order) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator+=(double s) noexcept;
  Jet& operator-=(double s) noexcept;
  Jet& operator*=(double s) noexcept;
  Jet& operator/=(double s);

  /// this += a * b without a temporary.
  void add_product(const Jet& a, const Jet& b);
  void add_product(const Jet& a, const Jet& b, double s);

  Jet operator-() const;

 private:
  std::array<double, kJetSize> c_{};
  int order_ = kMaxJetOrder;
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator+(Jet a, double s);
Jet operator+(double s, Jet a);
Jet operator-(Jet a, double s);
Jet operator-(double s, const Jet& a);
Jet operator*(Jet a, double s);
Jet operator*(double s, Jet a);
Jet operator/(Jet a, double s);
Jet operator/(double s, const Jet& a);

/// sum_k t[k] * (x - x(0))^k, where t[k] = g^(k)(x(0)) / k!.
Jet compose(const Jet& x, std::span<const double> taylor);

Jet reciprocal(const Jet& x);
Jet exp(const Jet& x);
Jet log(const Jet& x);
Jet sin(const Jet& x);
Jet cos(const Jet& x);
Jet sqrt(const Jet& x);
Jet pow(const Jet& x, int n);
Jet pow(const Jet& x, double p);

}  // namespace cpecheck
