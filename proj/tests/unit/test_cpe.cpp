#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "cpecheck/cpe.hpp"
#include "cpecheck/errors.hpp"
#include "helpers.hpp"

using namespace cpecheck;
using namespace testing_support;

namespace {

ScalarField random_scalar(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.5, 1.0);
  return ScalarField(u(rng) * x(0) - u(rng) * x(2) + random_cubic(rng, 0.2));
}

CPEInstance sphere_instance(double c) { return CPEInstance(sphere(), ScalarField(c * sphere_height())); }

}  // namespace

TEST_CASE("height functions on the round sphere solve the critical point equation") {
  std::mt19937_64 rng(31);
  for (double c : {1.0, -0.5, 2.0}) {
    const CPEInstance inst = sphere_instance(c);
    for (int k = 0; k < 3; ++k) {
      const CPEPoint p(inst, random_point(rng, 0.8));
      CHECK(std::abs(p.scalar() - 12.0) < 1e-10);
      CHECK(max_abs(cpe_residual(p)) < 1e-10);
      CHECK(max_abs(cpe_residual_via_adjoint(p)) < 1e-10);
      CHECK(std::abs(trace_residual(p)) < 1e-10);
      CHECK(max_abs(lemma21_residual(p)) < 1e-10);
      CHECK(max_abs(tensor_T(p)) < 1e-10);
      CHECK(max_abs(delta_wplus_cotton_chain(p).residual2) < 1e-10);
    }
  }
}

TEST_CASE("residual forms are related by the trace on arbitrary data") {
  std::mt19937_64 rng(32);
  for (int k = 0; k < 4; ++k) {
    const CPEInstance inst(random_generic(rng), random_scalar(rng));
    const CPEPoint p(inst, random_point(rng));
    const TensorValue a = cpe_residual(p);
    const TensorValue b = cpe_residual_via_adjoint(p);
    const double t = trace_residual(p);
    CHECK(std::abs(t) > 1e-3);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(std::abs(a(i, j) + b(i, j) + t * p.g()(i, j)) < 1e-10);
    CHECK(std::abs(contract(a, 0, 1, &p.g_inv()).entries()[0] + t) < 1e-10);
  }
}

TEST_CASE("T agrees with direct loops and its gradient contraction reduces") {
  std::mt19937_64 rng(33);
  const CPEInstance inst(random_generic(rng), random_scalar(rng));
  const CPEPoint p(inst, random_point(rng));
  const TensorValue t = tensor_T(p);
  const TensorValue& g = p.g();
  const TensorValue& ric = p.ricci();
  const TensorValue& df = p.df();
  const double r = p.scalar();
  double up[4] = {0, 0, 0, 0};
  for (int s = 0; s < 4; ++s)
    for (int k = 0; k < 4; ++k) up[s] += p.g_inv()(s, k) * df(k);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        double ris = 0, rjs = 0;
        for (int s = 0; s < 4; ++s) {
          ris += ric(i, s) * up[s];
          rjs += ric(j, s) * up[s];
        }
        const double want = 1.5 * (ric(i, k) * df(j) - ric(j, k) * df(i)) - 0.5 * (ris * g(j, k) - rjs * g(i, k)) -
                            0.5 * r * (df(j) * g(i, k) - df(i) * g(j, k));
        CHECK(std::abs(t(i, j, k) - want) < 1e-11);
      }
  const TContraction tc = t_contract_gradient(p);
  CHECK(max_abs(tc.contracted) > 1e-4);
  CHECK(max_abs(tc.contracted - tc.reduced) < 1e-11);
}

TEST_CASE("self-dual Cotton identity holds on generic metrics") {
  std::mt19937_64 rng(34);
  for (int k = 0; k < 3; ++k) {
    const CPEInstance inst(random_generic(rng), random_scalar(rng));
    const CPEPoint p(inst, random_point(rng));
    const CottonChain chain = delta_wplus_cotton_chain(p);
    CHECK(max_abs(cotton_tensor(p.geometry())) > 1e-4);
    CHECK(max_abs(chain.residual1) < 1e-9);
  }
  const CPEInstance inst(euclidean(), ScalarField(x(0)));
  CHECK_THROWS_AS(delta_wplus_cotton_chain(CPEPoint(inst, {0, 0, 0, 0}, JetMode::taylor, 2)), OrderError);
}

TEST_CASE("Codazzi equation for level sets") {
  std::mt19937_64 rng(35);
  for (int k = 0; k < 6; ++k) {
    const MetricField g = k % 2 == 0 ? MetricField::conformally_flat(4, random_cubic(rng)) : random_generic(rng);
    const CPEInstance inst(g, random_scalar(rng));
    const CPEPoint p(inst, random_point(rng));
    const TensorValue res = codazzi_residual(p);
    CHECK(res.dim() == 3);
    CHECK(max_abs(res) < 1e-9 * std::max(1.0, max_abs(value_of(p.geometry().riemann()))));
  }
}

TEST_CASE("level sets of |x|^2 in flat space are round spheres") {
  const CPEInstance inst(euclidean(), ScalarField(radius2()));
  const Point q{0.3, -0.4, 0.5, 0.1};
  const double r = std::sqrt(0.09 + 0.16 + 0.25 + 0.01);
  const LevelSetData ls = level_set_geometry(CPEPoint(inst, q));
  CHECK(std::abs(std::abs(ls.mean_curvature) - 3.0 / r) < 1e-10);
  CHECK(ls.umbilic_defect < 1e-10);
  CHECK(std::abs(ls.grad_norm - 2.0 * r) < 1e-12);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(ls.frame.vectors(0, i) - q[static_cast<std::size_t>(i)] / r) < 1e-12);
  CHECK(ls.frame.vectors.determinant() > 0);
  CHECK(std::abs(ls.mean_curvature_grad2 - (2.0 - 8.0) / (4.0 * r * r)) < 1e-10);
}

TEST_CASE("Ricci eigensystem") {
  std::mt19937_64 rng(36);
  const CPEInstance inst(random_generic(rng), random_scalar(rng));
  const CPEPoint p(inst, random_point(rng));
  const RicciEigensystem es = ricci_eigensystem_residual(p);
  Eigen::Matrix4d ric, g;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      ric(i, j) = p.ricci()(i, j);
      g(i, j) = p.g()(i, j);
    }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix4d> gen(ric, g);
  double total = 0.0;
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(es.eigenvalues[static_cast<std::size_t>(k)] - gen.eigenvalues()[k]) < 1e-10);
    // Generalized eigenvectors are g-orthonormal, so v^T df is the frame gradient up to sign.
    double d = 0.0;
    for (int i = 0; i < 4; ++i) d += gen.eigenvectors()(i, k) * p.df()(i);
    CHECK(std::abs(std::abs(es.gradient[static_cast<std::size_t>(k)]) - std::abs(d)) < 1e-10);
    total += es.gradient[static_cast<std::size_t>(k)] * es.gradient[static_cast<std::size_t>(k)];
  }
  CHECK(std::abs(total - p.grad_norm() * p.grad_norm()) < 1e-10);
  CHECK((es.basis * es.basis.transpose() - Eigen::Matrix4d::Identity()).norm() < 1e-12);
  for (int k = 0; k < 4; ++k) {
    for (int a = 0; a < 4; ++a) {
      if (std::abs(es.basis(k, a)) > 1e-12) {
        CHECK(es.basis(k, a) > 0);
        break;
      }
    }
  }
  const auto comb = eigensystem_combinations({1, 2, 3, 5}, {1, -1, 2, 0.5});
  CHECK(comb[0] == doctest::Approx((1 - 2) * 1 * -1 + (3 - 5) * 2 * 0.5));
  CHECK(comb[1] == doctest::Approx((1 - 3) * 1 * 2 + (5 - 2) * 0.5 * -1));
  CHECK(comb[2] == doctest::Approx((1 - 5) * 1 * 0.5 + (2 - 3) * -1 * 2));
}

TEST_CASE("critical points are rejected") {
  const CPEInstance inst = sphere_instance(1.0);
  const CPEPoint p(inst, {0, 0, 0, 0});
  CHECK_THROWS_AS(ricci_eigensystem_residual(p), CriticalPointError);
  CHECK_THROWS_AS(level_set_geometry(p), CriticalPointError);
}

TEST_CASE("gradient norm along a level set") {
  const CPEInstance inst = sphere_instance(1.0);
  // Level set height = 0 is the unit chart sphere.
  std::vector<Point> pts;
  std::mt19937_64 rng(37);
  for (int k = 0; k < 5; ++k) {
    Point q = random_point(rng, 1.0);
    const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    for (double& v : q) v /= n;
    pts.push_back(q);
  }
  const GradientNormConstancy gc = gradient_norm_constancy(inst, pts);
  CHECK(gc.deviation < 1e-10);
  CHECK(gc.tangential_max < 1e-10);
  CHECK(gc.cpe_rhs_max < 1e-10);
  CHECK(gc.factor_residual_max < 1e-10);
  CHECK_THROWS_AS(gradient_norm_constancy(inst, {{0.1, 0, 0, 0}, {0.5, 0, 0, 0}}), std::invalid_argument);

  const CPEInstance generic(random_generic(rng), random_scalar(rng));
  const Point q = random_point(rng);
  const GradientNormConstancy g2 = gradient_norm_constancy(generic, {q});
  CHECK(g2.tangential_max > 1e-4);
  CHECK(g2.factor_residual_max < 1e-10);
}

TEST_CASE("constant scalar curvature check") {
  const std::vector<Point> pts{{0.1, 0.2, 0.3, 0.4}, {-0.5, 0.1, 0.0, 0.2}};
  const CPEInstance s(sphere(2.0), ScalarField(x(0)), pts, true);
  CHECK(std::abs(s.scalar_curvature() - 3.0) < 1e-10);
  std::mt19937_64 rng(38);
  CHECK_THROWS_AS(CPEInstance(random_generic(rng), ScalarField(x(0)), pts, true), std::invalid_argument);
  CHECK(std::isnan(CPEInstance(sphere(), ScalarField(x(0))).scalar_curvature()));
}

namespace {

double norm3(const std::array<double, 3>& r) { return std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]); }

}  // namespace

TEST_CASE("eigensystem residual norm does not depend on the basis inside degenerate eigenspaces") {
  // S2(1) x S2(2): Ricci eigenvalues 1/4, 1/4, 1, 1.
  const Expr da = 1.0 + x(0) * x(0) + x(1) * x(1);
  const Expr db = 4.0 + x(2) * x(2) + x(3) * x(3);
  const Expr ca = 4.0 / (da * da), cb = 64.0 / (db * db);
  const MetricField g = MetricField::from_upper(4, {ca, 0.0, 0.0, 0.0, ca, 0.0, 0.0, cb, 0.0, cb});
  const CPEInstance inst(g, ScalarField(0.3 * x(0) - x(1) + 0.5 * x(2) + 0.2 * x(3) * x(3)));
  const RicciEigensystem es = ricci_eigensystem_residual(CPEPoint(inst, {0.2, -0.1, 0.4, 0.3}));
  CHECK(std::abs(es.eigenvalues[0] - es.eigenvalues[1]) < 1e-12);
  CHECK(std::abs(es.eigenvalues[2] - es.eigenvalues[3]) < 1e-12);
  REQUIRE(norm3(es.residuals) > 1e-3);

  std::mt19937_64 rng(39);
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
  bool components_moved = false;
  for (int trial = 0; trial < 10; ++trial) {
    const double s = angle(rng), t = angle(rng);
    const auto& d = es.gradient;
    const std::array<double, 4> rotated{std::cos(s) * d[0] - std::sin(s) * d[1], std::sin(s) * d[0] + std::cos(s) * d[1],
                                        std::cos(t) * d[2] - std::sin(t) * d[3], std::sin(t) * d[2] + std::cos(t) * d[3]};
    const auto r = eigensystem_combinations(es.eigenvalues, rotated);
    CHECK(std::abs(norm3(r) - norm3(es.residuals)) < 1e-10);
    for (int k = 0; k < 3; ++k) components_moved = components_moved || std::abs(r[k] - es.residuals[k]) > 1e-6;
  }
  // Two tied pairs: the individual combinations pick up a common phase.
  CHECK(components_moved);
}

TEST_CASE("eigensystem residual norm is invariant for every tie pattern") {
  std::mt19937_64 rng(40);
  std::normal_distribution<double> n01;
  // Groups of tied indices (ascending eigenvalues).
  const std::vector<std::vector<std::vector<int>>> patterns{
      {{0, 1}}, {{1, 2}}, {{2, 3}}, {{0, 1}, {2, 3}}, {{0, 1, 2}}, {{1, 2, 3}}, {{0, 1, 2, 3}}};
  for (const auto& pattern : patterns) {
    for (int trial = 0; trial < 20; ++trial) {
      std::array<double, 4> lambda{};
      for (double& l : lambda) l = n01(rng);
      std::sort(lambda.begin(), lambda.end());
      for (const auto& grp : pattern)
        for (int i : grp) lambda[static_cast<std::size_t>(i)] = lambda[static_cast<std::size_t>(grp[0])];
      Eigen::Vector4d d;
      for (int i = 0; i < 4; ++i) d(i) = n01(rng);
      Eigen::Matrix4d q = Eigen::Matrix4d::Identity();
      for (const auto& grp : pattern) {
        const int m = static_cast<int>(grp.size());
        Eigen::MatrixXd a(m, m);
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) a(i, j) = n01(rng);
        const Eigen::MatrixXd o = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) q(grp[static_cast<std::size_t>(i)], grp[static_cast<std::size_t>(j)]) = o(i, j);
      }
      const Eigen::Vector4d e = q * d;
      const auto r0 = eigensystem_combinations(lambda, {d(0), d(1), d(2), d(3)});
      const auto r1 = eigensystem_combinations(lambda, {e(0), e(1), e(2), e(3)});
      CHECK(std::abs(norm3(r0) - norm3(r1)) < 1e-10 * std::max(1.0, norm3(r0)));
    }
  }
}
