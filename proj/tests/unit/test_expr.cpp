#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cpecheck/errors.hpp"
#include "cpecheck/expr.hpp"

using namespace cpecheck;

TEST_CASE("parser respects precedence and associativity") {
  const Point x{2.0, 3.0, 0.5, -1.0};
  CHECK(parse_expression("1 + 2 * 3")(x) == 7.0);
  CHECK(parse_expression("2 ^ 3 ^ 2")(x) == 512.0);
  CHECK(parse_expression("-x1 ^ 2")(x) == -4.0);
  CHECK(parse_expression("(x1 + x2) / x3")(x) == 10.0);
  CHECK(parse_expression("sin(pi / 2) + exp(0) + log(1) + sqrt(x1 * 8)")(x) == doctest::Approx(6.0));
  CHECK(parse_expression("1e-2 * x4")(x) == doctest::Approx(-0.01));
}

TEST_CASE("parse errors carry a column") {
  try {
    parse_expression("x1 + * 2");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.column() == 6);
  }
  CHECK_THROWS_AS(parse_expression("x5"), ParseError);
  CHECK_THROWS_AS(parse_expression("foo(1)"), ParseError);
  CHECK_THROWS_AS(parse_expression("(1 + 2"), ParseError);
  CHECK_THROWS_AS(parse_expression(""), ParseError);
}

TEST_CASE("evaluation reports invalid operations") {
  const Point x{0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(parse_expression("log(x1)")(x), EvaluationError);
  CHECK_THROWS_AS(parse_expression("1 / x1")(x), EvaluationError);
  CHECK_THROWS_AS(parse_expression("sqrt(x1 - 1)")(x), EvaluationError);
}

TEST_CASE("shared subtrees are evaluated consistently") {
  const Expr r2 = Expr::var(0) * Expr::var(0) + Expr::var(1) * Expr::var(1);
  const Expr f = 4.0 / ((1.0 + r2) * (1.0 + r2));
  const Point x{0.3, 0.4, 0.0, 0.0};
  CHECK(f(x) == doctest::Approx(4.0 / (1.25 * 1.25)));
  const Jet j = f.jet(x, 2);
  CHECK(j.value() == doctest::Approx(f(x)));
  // d/dx1 of 4 (1 + r2)^-2 = -16 x1 (1 + r2)^-3
  CHECK(j.partial({1, 0, 0, 0}) == doctest::Approx(-16.0 * 0.3 / std::pow(1.25, 3)));
}
