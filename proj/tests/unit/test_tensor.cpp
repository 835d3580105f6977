#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cpecheck/operator2.hpp"
#include "cpecheck/tensor.hpp"

using namespace cpecheck;

namespace {

TensorValue random_metric(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  TensorValue g(n, covariant(2));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      g(i, j) = (i == j ? 1.0 : 0.0) + u(rng);
      g(j, i) = g(i, j);
    }
  }
  return g;
}

TensorValue random_tensor(std::mt19937_64& rng, int n, Variance v) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TensorValue t(n, std::move(v));
  for (auto& e : t.entries()) e = u(rng);
  return t;
}

}  // namespace

TEST_CASE("inverse metric contracts to the identity") {
  std::mt19937_64 rng(1);
  const TensorValue g = random_metric(rng, 4);
  const TensorValue gi = inverse_of(g);
  const TensorValue id = contract(outer(g, gi), 1, 2);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) CHECK(id(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
  }
}

TEST_CASE("contraction matches explicit loops") {
  std::mt19937_64 rng(2);
  const int n = 3;
  const TensorValue g = random_metric(rng, n);
  const TensorValue gi = inverse_of(g);
  const TensorValue t = random_tensor(rng, n, covariant(3));
  const TensorValue c = contract(t, 0, 2, &gi);
  for (int b = 0; b < n; ++b) {
    double s = 0.0;
    for (int a = 0; a < n; ++a) {
      for (int d = 0; d < n; ++d) s += gi(a, d) * t(a, b, d);
    }
    CHECK(c(b) == doctest::Approx(s));
  }
  CHECK_THROWS_AS(contract(t, 0, 2), std::invalid_argument);
  CHECK_THROWS_AS(contract(t, 1, 1, &gi), std::invalid_argument);
  CHECK_THROWS_AS(contract(t, 0, 1, &g), std::invalid_argument);
}

TEST_CASE("raise then lower is the identity and the norm is invariant") {
  std::mt19937_64 rng(3);
  const TensorValue g = random_metric(rng, 4);
  const TensorValue gi = inverse_of(g);
  const TensorValue t = random_tensor(rng, 4, covariant(2));
  const TensorValue back = lower(raise(t, 1, gi), 1, g);
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(back.entries()[k] == doctest::Approx(t.entries()[k]));
  const TensorValue up = raise_all(t, gi);
  double s = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) s += t.entries()[k] * up.entries()[k];
  CHECK(metric_inner(t, t, g, gi) == doctest::Approx(s));
}

TEST_CASE("permute and symmetry tags") {
  std::mt19937_64 rng(4);
  const TensorValue t = random_tensor(rng, 3, covariant(3));
  const std::vector<int> perm{2, 0, 1};
  const TensorValue p = permute(t, perm);
  CHECK(p(0, 1, 2) == t(1, 2, 0));
  TensorValue s = symmetrize(random_tensor(rng, 3, covariant(2)), 0, 1);
  CHECK_NOTHROW(s.with_symmetry(Symmetry::symmetric2));
  TensorValue a = antisymmetrize(random_tensor(rng, 3, covariant(2)), 0, 1);
  CHECK_NOTHROW(a.with_symmetry(Symmetry::antisymmetric2));
  CHECK_THROWS_AS(s.with_symmetry(Symmetry::antisymmetric2), std::invalid_argument);
  CHECK_THROWS_AS(TensorValue(3, covariant(2), std::vector<double>(5)), std::invalid_argument);
}

TEST_CASE("operator adjoint and Hilbert-Schmidt product") {
  std::mt19937_64 rng(5);
  const TensorValue g = random_metric(rng, 4);
  const std::vector<double> gm(g.entries().begin(), g.entries().end());
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> m(16), x(4), y(4);
  for (auto& e : m) e = u(rng);
  for (auto& e : x) e = u(rng);
  for (auto& e : y) e = u(rng);
  const Operator2 s(4, m, gm);
  const Operator2 sa = s.adjoint();
  CHECK(s.inner(s.apply(x), y) == doctest::Approx(s.inner(x, sa.apply(y))));
  CHECK(traceless_part(s).trace() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(hs_norm2(s) >= 0.0);
  const Operator2 e(4, m);
  CHECK_THROWS_AS(s + e, std::invalid_argument);
}
