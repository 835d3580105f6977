#include "cpecheck/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "cpecheck/errors.hpp"

namespace cpecheck {

Expr::Expr() : Expr(0.0) {}

Expr::Expr(double c) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::constant;
  n->value = c;
  node_ = std::move(n);
}

Expr Expr::var(int index) {
  if (index < 0 || index >= 4) throw std::invalid_argument("coordinate index out of range");
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::variable;
  n->variable = index;
  return Expr(std::shared_ptr<const ExprNode>(std::move(n)));
}

ExprKind Expr::kind() const { return node_->kind; }
bool Expr::is_constant() const { return node_->kind == ExprKind::constant; }
double Expr::constant_value() const { return node_->value; }

namespace {

double fold(ExprKind k, double a, double b) {
  switch (k) {
    case ExprKind::add: return a + b;
    case ExprKind::sub: return a - b;
    case ExprKind::mul: return a * b;
    case ExprKind::div: return a / b;
    case ExprKind::pow: return std::pow(a, b);
    default: return 0.0;
  }
}

double fold(ExprKind k, double a) {
  switch (k) {
    case ExprKind::neg: return -a;
    case ExprKind::exp: return std::exp(a);
    case ExprKind::log: return std::log(a);
    case ExprKind::sin: return std::sin(a);
    case ExprKind::cos: return std::cos(a);
    case ExprKind::sqrt: return std::sqrt(a);
    default: return 0.0;
  }
}

}  // namespace

Expr Expr::make(ExprKind kind, const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    const double v = fold(kind, a.constant_value(), b.constant_value());
    if (std::isfinite(v)) return Expr(v);
  }
  // trivial identities keep catalog trees small
  if (kind == ExprKind::mul) {
    if ((a.is_constant() && a.constant_value() == 0.0) ||
        (b.is_constant() && b.constant_value() == 0.0)) {
      return Expr(0.0);
    }
    if (a.is_constant() && a.constant_value() == 1.0) return b;
    if (b.is_constant() && b.constant_value() == 1.0) return a;
  }
  if (kind == ExprKind::add) {
    if (a.is_constant() && a.constant_value() == 0.0) return b;
    if (b.is_constant() && b.constant_value() == 0.0) return a;
  }
  if (kind == ExprKind::sub && b.is_constant() && b.constant_value() == 0.0) return a;
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->lhs = a.node_;
  n->rhs = b.node_;
  return Expr(std::shared_ptr<const ExprNode>(std::move(n)));
}

Expr Expr::make(ExprKind kind, const Expr& a) {
  if (a.is_constant()) {
    const double v = fold(kind, a.constant_value());
    if (std::isfinite(v)) return Expr(v);
  }
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->lhs = a.node_;
  return Expr(std::shared_ptr<const ExprNode>(std::move(n)));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::make(ExprKind::add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::make(ExprKind::sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::make(ExprKind::mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::make(ExprKind::div, a, b); }
Expr operator-(const Expr& a) { return Expr::make(ExprKind::neg, a); }
Expr pow(const Expr& base, const Expr& exponent) { return Expr::make(ExprKind::pow, base, exponent); }
Expr exp(const Expr& a) { return Expr::make(ExprKind::exp, a); }
Expr log(const Expr& a) { return Expr::make(ExprKind::log, a); }
Expr sin(const Expr& a) { return Expr::make(ExprKind::sin, a); }
Expr cos(const Expr& a) { return Expr::make(ExprKind::cos, a); }
Expr sqrt(const Expr& a) { return Expr::make(ExprKind::sqrt, a); }

namespace {

void print(std::ostream& os, const ExprNode* n) {
  auto binary = [&](const char* op) {
    os << '(';
    print(os, n->lhs.get());
    os << ' ' << op << ' ';
    print(os, n->rhs.get());
    os << ')';
  };
  auto call = [&](const char* f) {
    os << f << '(';
    print(os, n->lhs.get());
    os << ')';
  };
  switch (n->kind) {
    case ExprKind::constant: {
      std::ostringstream s;
      s.precision(17);
      s << n->value;
      os << s.str();
      break;
    }
    case ExprKind::variable: os << 'x' << (n->variable + 1); break;
    case ExprKind::add: binary("+"); break;
    case ExprKind::sub: binary("-"); break;
    case ExprKind::mul: binary("*"); break;
    case ExprKind::div: binary("/"); break;
    case ExprKind::pow: binary("^"); break;
    case ExprKind::neg:
      os << "(-";
      print(os, n->lhs.get());
      os << ')';
      break;
    case ExprKind::exp: call("exp"); break;
    case ExprKind::log: call("log"); break;
    case ExprKind::sin: call("sin"); break;
    case ExprKind::cos: call("cos"); break;
    case ExprKind::sqrt: call("sqrt"); break;
  }
}

// Scalar-level primitives shared by both evaluators.
double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw EvaluationError(std::string("non-finite result in ") + what);
  return v;
}

double apply_pow(double base, const ExprNode* exponent_node, double exponent) {
  if (exponent_node->kind == ExprKind::constant && exponent == std::floor(exponent)) {
    if (base == 0.0 && exponent < 0) throw EvaluationError("negative power of zero");
    return std::pow(base, exponent);
  }
  if (!(base > 0.0)) throw EvaluationError("non-integer power of a non-positive value");
  return std::pow(base, exponent);
}

Jet apply_pow(const Jet& base, const ExprNode* exponent_node, const Jet& exponent) {
  if (exponent_node->kind == ExprKind::constant) return pow(base, exponent_node->value);
  return exp(exponent * log(base));
}

double unary(ExprKind k, double a) {
  switch (k) {
    case ExprKind::neg: return -a;
    case ExprKind::exp: return checked(std::exp(a), "exp");
    case ExprKind::log:
      if (!(a > 0.0)) throw EvaluationError("log of a non-positive value");
      return std::log(a);
    case ExprKind::sin: return std::sin(a);
    case ExprKind::cos: return std::cos(a);
    case ExprKind::sqrt:
      if (a < 0.0) throw EvaluationError("sqrt of a negative value");
      return std::sqrt(a);
    default: throw std::logic_error("not a unary node");
  }
}

Jet unary(ExprKind k, const Jet& a) {
  switch (k) {
    case ExprKind::neg: return -a;
    case ExprKind::exp: return exp(a);
    case ExprKind::log: return log(a);
    case ExprKind::sin: return sin(a);
    case ExprKind::cos: return cos(a);
    case ExprKind::sqrt: return sqrt(a);
    default: throw std::logic_error("not a unary node");
  }
}

double divide(double a, double b) {
  if (b == 0.0) throw EvaluationError("division by zero");
  return a / b;
}

Jet divide(const Jet& a, const Jet& b) { return a / b; }

double finite_value(double v) { return checked(v, "expression"); }
Jet finite_value(Jet v) {
  checked(v.value(), "expression");
  return v;
}

}  // namespace

std::string Expr::to_string() const {
  std::ostringstream os;
  print(os, node_.get());
  return os.str();
}

template <class T>
Evaluator<T>::Evaluator(const Point& x, int order) {
  for (int v = 0; v < 4; ++v) {
    if constexpr (std::is_same_v<T, double>) {
      coords_[v] = x[v];
    } else {
      coords_[v] = Jet::variable(v, x[v]).truncated(order);
    }
  }
}

template <class T>
T Evaluator<T>::operator()(const Expr& e) {
  return eval(e.node());
}

template <class T>
T Evaluator<T>::eval(const ExprNode* n) {
  if (n->kind == ExprKind::variable) return coords_[n->variable];
  if (n->kind == ExprKind::constant) {
    if constexpr (std::is_same_v<T, double>) {
      return n->value;
    } else {
      return Jet::constant(n->value);
    }
  }
  if (auto it = cache_.find(n); it != cache_.end()) return it->second;
  T result{};
  switch (n->kind) {
    case ExprKind::add: result = eval(n->lhs.get()) + eval(n->rhs.get()); break;
    case ExprKind::sub: result = eval(n->lhs.get()) - eval(n->rhs.get()); break;
    case ExprKind::mul: result = eval(n->lhs.get()) * eval(n->rhs.get()); break;
    case ExprKind::div: result = divide(eval(n->lhs.get()), eval(n->rhs.get())); break;
    case ExprKind::pow:
      result = apply_pow(eval(n->lhs.get()), n->rhs.get(), eval(n->rhs.get()));
      break;
    default: result = unary(n->kind, eval(n->lhs.get())); break;
  }
  result = finite_value(result);
  cache_.emplace(n, result);
  return result;
}

template class Evaluator<double>;
template class Evaluator<Jet>;

double Expr::operator()(const Point& x) const { return Evaluator<double>(x)(*this); }

Jet Expr::jet(const Point& x, int order) const { return Evaluator<Jet>(x, order)(*this); }

// ---------------------------------------------------------------------------
// parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(pos_ + 1, msg); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expression() {
    Expr e = term();
    for (;;) {
      if (accept('+')) {
        e = e + term();
      } else if (accept('-')) {
        e = e - term();
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = unary_expr();
    for (;;) {
      if (accept('*')) {
        e = e * unary_expr();
      } else if (accept('/')) {
        e = e / unary_expr();
      } else {
        return e;
      }
    }
  }

  Expr unary_expr() {
    if (accept('-')) return -unary_expr();
    if (accept('+')) return unary_expr();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) return pow(base, unary_expr());
    return base;
  }

  Expr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (accept('(')) {
      Expr e = expression();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    std::string buf(text_.substr(pos_));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(buf, &used);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pos_ = start + used;
    return Expr(v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '4') {
      return Expr::var(name[1] - '1');
    }
    if (name == "pi") return Expr(M_PI);
    using Fn = Expr (*)(const Expr&);
    Fn fn = nullptr;
    if (name == "exp") fn = &exp;
    if (name == "log") fn = &log;
    if (name == "sin") fn = &sin;
    if (name == "cos") fn = &cos;
    if (name == "sqrt") fn = &sqrt;
    if (fn == nullptr) {
      pos_ = start;
      fail("unknown identifier '" + name + "'");
    }
    if (!accept('(')) fail("expected '(' after " + name);
    Expr arg = expression();
    if (!accept(')')) fail("expected ')'");
    return fn(arg);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(std::string_view text) { return Parser(text).parse(); }

}  // namespace cpecheck
