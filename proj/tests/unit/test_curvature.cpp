#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cpecheck/curvature.hpp"
#include "cpecheck/errors.hpp"
#include "helpers.hpp"

using namespace cpecheck;
using namespace testing_support;

namespace {

// R_ijkl = k (g_ik g_jl - g_il g_jk) for sectional curvature k.
double space_form_error(const CurvaturePoint& cp, double k) {
  const int n = cp.g.dim();
  double err = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const double want = k * (cp.g(i, a) * cp.g(j, b) - cp.g(i, b) * cp.g(j, a));
          err = std::max(err, std::abs(cp.riemann(i, j, a, b) - want));
        }
  return err;
}

}  // namespace

TEST_CASE("Euclidean metric is flat") {
  const CurvaturePoint cp = curvature_at(euclidean(), {0.1, 0.2, 0.3, 0.4});
  CHECK(max_abs(cp.riemann) == 0.0);
  CHECK(cp.scalar == 0.0);
}

TEST_CASE("round spheres match the constant-curvature oracle") {
  std::mt19937_64 rng(11);
  for (double r : {1.0, 0.7, 2.0}) {
    for (int k = 0; k < 5; ++k) {
      const Point p = random_point(rng, 1.5);
      const CurvaturePoint cp = curvature_at(sphere_direct(r), p);
      CHECK(space_form_error(cp, 1.0 / (r * r)) < 1e-10 * std::max(1.0, max_abs(cp.riemann)));
      CHECK(cp.scalar == doctest::Approx(12.0 / (r * r)).epsilon(1e-11));
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(std::abs(cp.ricci(i, j) - 3.0 / (r * r) * cp.g(i, j)) < 1e-10);
      CHECK(symmetry_violation(cp.riemann, Symmetry::riemann) < 1e-9);
    }
  }
}

TEST_CASE("Riemann symmetries on generic metrics, both jet modes") {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 5; ++k) {
    const MetricField g = random_generic(rng);
    const Point p = random_point(rng);
    const CurvaturePoint t = curvature_at(g, p);
    const CurvaturePoint f = curvature_at(g, p, JetMode::fd);
    CHECK(symmetry_violation(t.riemann, Symmetry::riemann) < 1e-9);
    CHECK(max_abs(t.riemann - f.riemann) < 1e-6);
    CHECK(t.scalar == doctest::Approx(f.scalar).epsilon(1e-6));
  }
}

TEST_CASE("metric compatibility and the contracted Bianchi identity") {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 4; ++k) {
    const MetricField g = MetricField::conformally_flat(4, random_cubic(rng));
    const LocalGeometry geom(g, random_point(rng));
    CHECK(max_abs(value_of(geom.covariant_derivative(geom.metric()))) < 1e-12);
    // g^{jl} d_l Ric_jk - d_k R / 2
    const TensorJet dric = geom.covariant_derivative(geom.ricci());
    const TensorJet dr = geom.gradient(geom.scalar());
    const TensorValue gi = value_of(geom.inverse_metric());
    for (int kk = 0; kk < 4; ++kk) {
      double div = 0.0;
      for (int j = 0; j < 4; ++j)
        for (int l = 0; l < 4; ++l) div += gi(j, l) * dric(l, j, kk).value();
      CHECK(std::abs(div - 0.5 * dr(kk).value()) < 1e-9);
    }
  }
}

TEST_CASE("scalar curvature is invariant under linear chart changes") {
  // g = e^{2 phi(y)} dy^2 pulled back through y = A x.
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  double a[4][4];
  for (auto& row : a)
    for (double& v : row) v = u(rng);
  for (int i = 0; i < 4; ++i) a[i][i] += 1.0;
  std::vector<Expr> y(4);
  for (int p = 0; p < 4; ++p) {
    Expr e = 0.0;
    for (int i = 0; i < 4; ++i) e = e + a[p][i] * x(i);
    y[static_cast<std::size_t>(p)] = e;
  }
  auto phi = [](const std::vector<Expr>& c) { return 0.2 * c[0] * c[1] - 0.3 * c[2] * c[2] + 0.1 * c[3] * c[0] * c[1]; };
  const MetricField gy = MetricField::conformally_flat(4, phi({x(0), x(1), x(2), x(3)}));
  std::vector<Expr> upper;
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      double s = 0.0;
      for (int p = 0; p < 4; ++p) s += a[p][i] * a[p][j];
      upper.push_back(s * exp(2.0 * phi(y)));
    }
  }
  const MetricField gx = MetricField::from_upper(4, upper);
  const Point xp{0.1, -0.2, 0.15, 0.05};
  Point yp{};
  for (int p = 0; p < 4; ++p) {
    for (int i = 0; i < 4; ++i) yp[p] += a[p][i] * xp[i];
  }
  CHECK(curvature_at(gx, xp).scalar == doctest::Approx(curvature_at(gy, yp).scalar).epsilon(1e-8));
}

TEST_CASE("Hessian and Laplacian") {
  const Point p{0.3, -0.1, 0.2, 0.4};
  const ScalarField half_r2(0.5 * radius2());
  const HessianLaplacian flat = hessian_laplacian(half_r2, euclidean(), p);
  CHECK(flat.laplacian == doctest::Approx(4.0));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(flat.hessian(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));

  const ScalarField h(sphere_height());
  const MetricField s = sphere_direct();
  const HessianLaplacian sh = hessian_laplacian(h, s, p);
  const TensorValue g = s.at(p);
  const double hv = h(p);
  CHECK(sh.laplacian == doctest::Approx(-4.0 * hv).epsilon(1e-12));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(std::abs(sh.hessian(i, j) + hv * g(i, j)) < 1e-12);

  CHECK(hessian_laplacian(ScalarField(Expr(3.0)), s, p).laplacian == 0.0);
}

TEST_CASE("fast scalar curvature agrees with the jet pipeline") {
  std::mt19937_64 rng(15);
  const MetricField g = random_generic(rng);
  const Point p = random_point(rng);
  double vol = 0.0;
  CHECK(scalar_curvature_fast(g, p, &vol) == doctest::Approx(curvature_at(g, p).scalar).epsilon(1e-11));
  CHECK(vol == doctest::Approx(LocalGeometry(g, p, JetMode::taylor, 2).volume_density().value()));
}

TEST_CASE("errors") {
  const MetricField bad = MetricField::from_upper(4, {1.0, 2.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0});
  CHECK_THROWS_AS(curvature_at(bad, {0, 0, 0, 0}), DegenerateMetricError);
  const LocalGeometry geom(sphere(), {0.1, 0.1, 0.1, 0.1}, JetMode::taylor, 2);
  CHECK_THROWS_AS(geom.covariant_derivative(geom.ricci()), OrderError);
  const MetricField boxed = MetricField::conformally_flat(4, x(0), Box::cube(-1.0, 1.0));
  CHECK_THROWS_AS(curvature_at(boxed, {2.0, 0, 0, 0}), DomainError);
}
