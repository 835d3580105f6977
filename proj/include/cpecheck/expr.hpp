#pragma once

// Immutable expression trees over the chart coordinates x1..x4.
//
// Trees are shared (subexpressions may appear in several metric components),
// so evaluation goes through an Evaluator that memoizes per node. The same
// tree evaluates to a double or to a Jet; the latter is Taylor-mode
// differentiation of the expression.
//
// Text grammar (used by scenario files):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right associative
//   primary := number | 'pi' | x1..x4 | func '(' expr ')' | '(' expr ')'
//   func    := exp | log | sin | cos | sqrt

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>

#include "cpecheck/jet.hpp"

namespace cpecheck {

using Point = std::array<double, 4>;

enum class ExprKind : std::uint8_t {
  constant,
  variable,
  add,
  sub,
  mul,
  div,
  pow,
  neg,
  exp,
  log,
  sin,
  cos,
  sqrt
};

struct ExprNode;

class Expr {
 public:
  Expr();  // constant 0
  Expr(double c);  // NOLINT(google-explicit-constructor): literals in formulas
  static Expr var(int index);  // 0-based coordinate index

  ExprKind kind() const;
  bool is_constant() const;
  double constant_value() const;
  const ExprNode* node() const { return node_.get(); }

  double operator()(const Point& x) const;
  Jet jet(const Point& x, int order) const;

  std::string to_string() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& base, const Expr& exponent);
  friend Expr exp(const Expr& a);
  friend Expr log(const Expr& a);
  friend Expr sin(const Expr& a);
  friend Expr cos(const Expr& a);
  friend Expr sqrt(const Expr& a);

 private:
  explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
  static Expr make(ExprKind kind, const Expr& a, const Expr& b);
  static Expr make(ExprKind kind, const Expr& a);

  std::shared_ptr<const ExprNode> node_;
};

struct ExprNode {
  ExprKind kind = ExprKind::constant;
  double value = 0.0;
  int variable = 0;
  std::shared_ptr<const ExprNode> lhs;
  std::shared_ptr<const ExprNode> rhs;
};

/// Memoizing evaluator bound to one point. T is double or Jet.
template <class T>
class Evaluator {
 public:
  /// For T = Jet, `order` is the truncation order of the coordinate jets.
  explicit Evaluator(const Point& x, int order = kMaxJetOrder);
  T operator()(const Expr& e);

 private:
  T eval(const ExprNode* n);
  std::array<T, 4> coords_;
  std::unordered_map<const ExprNode*, T> cache_;
};

extern template class Evaluator<double>;
extern template class Evaluator<Jet>;

/// Parses the text grammar above. Throws ParseError with a 1-based column.
Expr parse_expression(std::string_view text);

}  // namespace cpecheck
