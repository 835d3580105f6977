#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cpecheck/conformal.hpp"
#include "helpers.hpp"

using namespace cpecheck;
using namespace testing_support;

namespace {

double relative(const TensorValue& residual, double scale) { return max_abs(residual) / std::max(1.0, scale); }

}  // namespace

TEST_CASE("Weyl tensor vanishes on space forms and conformally flat metrics") {
  std::mt19937_64 rng(21);
  const CurvaturePoint s = curvature_at(sphere(), random_point(rng, 1.0));
  CHECK(max_abs(weyl_tensor(s)) < 1e-10);
  for (int k = 0; k < 5; ++k) {
    const CurvaturePoint cp = curvature_at(MetricField::conformally_flat(4, random_cubic(rng)), random_point(rng));
    CHECK(max_abs(weyl_tensor(cp)) < 1e-8 * std::max(1e-300, max_abs(cp.riemann)));
  }
}

TEST_CASE("Weyl tensor is totally trace free and reconstructs Riemann") {
  std::mt19937_64 rng(22);
  for (int k = 0; k < 5; ++k) {
    const CurvaturePoint cp = curvature_at(random_generic(rng), random_point(rng));
    const TensorValue w = weyl_tensor(cp);
    CHECK(max_abs(w) > 1e-3);
    CHECK(symmetry_violation(w, Symmetry::riemann) < 1e-9);
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) CHECK(max_abs(contract(w, a, b, &cp.g_inv)) < 1e-9 * max_abs(w));
  }
  CHECK_THROWS_AS(weyl_tensor(curvature_at(euclidean(2), {0, 0, 0, 0})), std::invalid_argument);
}

TEST_CASE("Schouten tensor") {
  const CurvaturePoint s = curvature_at(sphere(), {0.2, 0.1, -0.3, 0.5});
  const TensorValue a = schouten_tensor(s);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(a(i, j) - 0.5 * s.g(i, j)) < 1e-10);
  CHECK(max_abs(schouten_tensor(curvature_at(euclidean(), {0, 0, 0, 0}))) == 0.0);
}

TEST_CASE("Cotton tensor: antisymmetry, Schouten form, Weyl divergence") {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 6; ++k) {
    const MetricField g = k % 2 == 0 ? MetricField::conformally_flat(4, random_cubic(rng)) : random_generic(rng);
    const LocalGeometry geom(g, random_point(rng));
    const TensorValue c = cotton_tensor(geom);
    if (k % 2 == 0) {
      CHECK(max_abs(c) < 1e-10);  // conformally flat in dimension 4
    } else {
      CHECK(max_abs(c) > 1e-4);
    }
    const std::vector<int> swap01{1, 0, 2};
    CHECK(max_abs(c + permute(c, std::span<const int>(swap01))) < 1e-12 * std::max(1.0, max_abs(c)));
    CHECK(relative(c - schouten_cotton(geom), max_abs(c)) < 1e-10);
    CHECK(relative(cotton_weyl_residual(geom), max_abs(c)) < 1e-9);
  }
}

TEST_CASE("flat metric has vanishing Cotton tensor and Weyl divergence") {
  const LocalGeometry geom(euclidean(), {0.3, 0.2, 0.1, 0.0});
  CHECK(max_abs(cotton_tensor(geom)) == 0.0);
  CHECK(max_abs(divergence_four_tensor(geom, weyl_jet(geom))) == 0.0);
}

TEST_CASE("Cotton tensor in finite-difference mode agrees within the third-order tier") {
  std::mt19937_64 rng(24);
  const MetricField g = MetricField::conformally_flat(4, random_cubic(rng));
  const Point p = random_point(rng);
  const TensorValue t = cotton_tensor(g, p);
  const TensorValue f = cotton_tensor(g, p, JetMode::fd);
  CHECK(max_abs(t - f) < 1e-4);
}
