#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "cpecheck/expr.hpp"
#include "cpecheck/finite_difference.hpp"
#include "cpecheck/jet.hpp"

using namespace cpecheck;

namespace {

// Sparse polynomial in 4 variables: exact derivatives by the power rule.
using Poly = std::map<MultiIndex, double>;

Poly multiply(const Poly& a, const Poly& b) {
  Poly r;
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) {
      MultiIndex m{};
      for (int v = 0; v < 4; ++v) m[v] = ma[v] + mb[v];
      r[m] += ca * cb;
    }
  }
  return r;
}

double poly_partial(const Poly& p, const MultiIndex& a, const Point& x) {
  double s = 0.0;
  for (const auto& [m, c] : p) {
    double term = c;
    for (int v = 0; v < 4; ++v) {
      if (m[v] < a[v]) {
        term = 0.0;
        break;
      }
      for (int k = 0; k < a[v]; ++k) term *= m[v] - k;
      term *= std::pow(x[v], m[v] - a[v]);
    }
    s += term;
  }
  return s;
}

Expr poly_expr(const Poly& p) {
  Expr e = 0.0;
  for (const auto& [m, c] : p) {
    Expr t = c;
    for (int v = 0; v < 4; ++v) {
      for (int k = 0; k < m[v]; ++k) t = t * Expr::var(v);
    }
    e = e + t;
  }
  return e;
}

Poly random_poly(std::mt19937_64& rng, int degree, int terms) {
  std::uniform_int_distribution<int> ex(0, degree);
  std::uniform_real_distribution<double> co(-1.0, 1.0);
  Poly p;
  for (int t = 0; t < terms; ++t) {
    MultiIndex m{};
    int left = degree;
    for (int v = 0; v < 4; ++v) {
      m[v] = std::uniform_int_distribution<int>(0, left)(rng);
      left -= m[v];
    }
    p[m] += co(rng);
  }
  (void)ex;
  return p;
}

}  // namespace

TEST_CASE("monomial table is graded and invertible") {
  CHECK(jet_table::count_up_to(0) == 1);
  CHECK(jet_table::count_up_to(2) == 15);
  CHECK(jet_table::count_up_to(4) == kJetSize);
  int prev = 0;
  for (int k = 0; k < kJetSize; ++k) {
    CHECK(jet_table::degree(k) >= prev);
    prev = jet_table::degree(k);
    CHECK(jet_table::index_of(jet_table::monomial(k)) == k);
  }
  CHECK(jet_table::index_of({5, 0, 0, 0}) == -1);
}

TEST_CASE("polynomial jets match symbolic derivatives") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Poly a = random_poly(rng, 3, 5);
    const Poly b = random_poly(rng, 3, 5);
    const Poly ab = multiply(a, b);
    const Point x{u(rng), u(rng), u(rng), u(rng)};
    const Jet ja = poly_expr(a).jet(x, 4);
    const Jet jb = poly_expr(b).jet(x, 4);
    const Jet prod = ja * jb;
    for (int k = 0; k < kJetSize; ++k) {
      const MultiIndex& m = jet_table::monomial(k);
      CHECK(prod.partial(m) == doctest::Approx(poly_partial(ab, m, x)).epsilon(1e-12));
      CHECK(ja.partial(m) == doctest::Approx(poly_partial(a, m, x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("arithmetic truncates at the smaller order") {
  const Jet a = Jet::variable(0, 1.0);
  const Jet b = Jet::variable(1, 2.0).truncated(2);
  CHECK((a * b).order() == 2);
  CHECK((a + b).order() == 2);
  CHECK(a.derivative(0).order() == 3);
  CHECK(a.derivative(0).value() == 1.0);
}

TEST_CASE("elementary functions satisfy their identities") {
  const Point x{0.3, -0.2, 0.5, 0.1};
  const Expr s = Expr::var(0) + 2.0 * Expr::var(1) * Expr::var(2) + 1.5;
  const Jet j = s.jet(x, 4);
  const Jet one = sin(j) * sin(j) + cos(j) * cos(j);
  CHECK(one.value() == doctest::Approx(1.0));
  for (int k = 1; k < kJetSize; ++k) CHECK(std::abs(one.coefficient(k)) < 1e-13);
  const Jet back = log(exp(j));
  const Jet root = sqrt(j) * sqrt(j);
  const Jet inv = reciprocal(j) * j;
  const Jet p = pow(j, 2.5) / (j * j * sqrt(j));
  for (int k = 0; k < kJetSize; ++k) {
    CHECK(back.coefficient(k) == doctest::Approx(j.coefficient(k)).epsilon(1e-12));
    CHECK(root.coefficient(k) == doctest::Approx(j.coefficient(k)).epsilon(1e-12));
    CHECK(inv.coefficient(k) == doctest::Approx(k == 0 ? 1.0 : 0.0).epsilon(1e-12));
    CHECK(p.coefficient(k) == doctest::Approx(k == 0 ? 1.0 : 0.0).epsilon(1e-12));
  }
  CHECK_THROWS(log(Jet::constant(-1.0)));
}

TEST_CASE("finite-difference jets agree with Taylor jets within the declared tolerance") {
  const Expr e = exp(0.3 * Expr::var(0) - 0.2 * Expr::var(3)) * cos(Expr::var(1) + 0.5 * Expr::var(2));
  const Point x{0.1, 0.2, -0.3, 0.4};
  const Jet t = e.jet(x, 4);
  const Jet f = fd_jet([&e](const Point& p) { return e(p); }, x, 4);
  for (int k = 0; k < kJetSize; ++k) {
    const MultiIndex& m = jet_table::monomial(k);
    const int d = jet_table::degree(k);
    const double tol = d <= 2 ? 1e-7 : (d == 3 ? 1e-5 : 1e-3);
    CHECK(std::abs(f.partial(m) - t.partial(m)) < tol);
  }
}
