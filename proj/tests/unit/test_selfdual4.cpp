#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>

#include "cpecheck/catalog.hpp"
#include "cpecheck/conformal.hpp"
#include "cpecheck/errors.hpp"
#include "cpecheck/selfdual4.hpp"
#include "helpers.hpp"

using namespace cpecheck;
using namespace testing_support;

namespace {

int parity(std::array<int, 4> p) {
  int s = 1;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (p[static_cast<std::size_t>(i)] > p[static_cast<std::size_t>(j)]) s = -s;
  return s;
}

std::array<double, 3> sorted_eigenvalues(const Matrix3& m) {
  Eigen::SelfAdjointEigenSolver<Matrix3> es(m);
  return {es.eigenvalues()[0], es.eigenvalues()[1], es.eigenvalues()[2]};
}

}  // namespace

TEST_CASE("frames are orthonormal and positively oriented") {
  std::mt19937_64 rng(41);
  const Point q = random_point(rng);
  const TensorValue g = random_generic(rng).at(q);
  const Frame fr = orthonormal_frame(g, q);
  const TensorValue gf = to_frame(g, fr);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) CHECK(std::abs(gf(a, b) - (a == b ? 1.0 : 0.0)) < 1e-12);
  CHECK(fr.vectors.determinant() > 0);
  CHECK(max_abs(from_frame(gf, fr) - g) < 1e-12);
  Eigen::Matrix4d rows = Eigen::Matrix4d::Identity();
  rows.row(3).setZero();
  CHECK_THROWS_AS(frame_from_vectors(g, rows), DegenerateMetricError);
}

TEST_CASE("Hodge star and the Lambda+- bases") {
  for (int r = 0; r < 4; ++r)
    for (int s = 0; s < 4; ++s) {
      if (r == s) {
        CHECK_THROWS_AS(dual_pair(r, s), std::invalid_argument);
        continue;
      }
      const auto [rb, sb] = dual_pair(r, s);
      CHECK(parity({r, s, rb, sb}) == 1);
      CHECK((hodge_star(wedge(r, s)) - wedge(rb, sb)).norm() < 1e-15);
    }
  const TwoFormSplit& split = two_form_split();
  for (int i = 0; i < 3; ++i) {
    const Bivector& p = split.lambda_plus[static_cast<std::size_t>(i)];
    const Bivector& m = split.lambda_minus[static_cast<std::size_t>(i)];
    CHECK((hodge_star(p) - p).norm() < 1e-15);
    CHECK((hodge_star(m) + m).norm() < 1e-15);
    CHECK((hodge_star(hodge_star(m)) - m).norm() < 1e-15);
    for (int j = 0; j < 3; ++j) {
      const double d = i == j ? 1.0 : 0.0;
      CHECK(std::abs(bivector_inner(p, split.lambda_plus[static_cast<std::size_t>(j)]) - d) < 1e-15);
      CHECK(std::abs(bivector_inner(m, split.lambda_minus[static_cast<std::size_t>(j)]) - d) < 1e-15);
      CHECK(std::abs(bivector_inner(p, split.lambda_minus[static_cast<std::size_t>(j)])) < 1e-15);
    }
  }
  CHECK((split.lambda_plus[0] - (wedge(0, 1) + wedge(2, 3)) / std::sqrt(2.0)).norm() < 1e-15);
}

TEST_CASE("curvature operator of the round sphere is the identity") {
  const CurvaturePoint cp = curvature_at(sphere(), {0.3, -0.2, 0.1, 0.4});
  const Matrix6 m = curvature_operator_blocks(cp, orthonormal_frame(cp.g));
  CHECK((m - Matrix6::Identity()).norm() < 1e-10);
}

TEST_CASE("self-dual projections on a generic metric") {
  std::mt19937_64 rng(42);
  const LocalGeometry geom(random_generic(rng), random_point(rng));
  const CurvaturePoint cp = geom.at_point();
  const Frame fr = orthonormal_frame(cp.g, cp.point);
  const TensorValue w = weyl_tensor(cp);
  const TensorValue wf = to_frame(w, fr);
  const TensorJet wj = weyl_jet(geom);
  const TensorValue wp = to_frame(value_of(self_dual_part(geom, wj, 1)), fr);
  const TensorValue wm = to_frame(value_of(self_dual_part(geom, wj, -1)), fr);
  CHECK(max_abs(wp - self_dual_part_frame(wf, 1)) < 1e-11);
  CHECK(max_abs(wm - self_dual_part_frame(wf, -1)) < 1e-11);
  CHECK(max_abs(wp + wm - wf) < 1e-11);

  // Spot check against the explicit formula W+_0123 = (W_0123 + W_0101) / 2 in a frame.
  CHECK(std::abs(wp(0, 1, 2, 3) - 0.5 * (wf(0, 1, 2, 3) + wf(0, 1, 0, 1))) < 1e-11);

  const WeylBlocks blocks = weyl_blocks(wf, to_frame(cp.ricci, fr), cp.scalar);
  CHECK(std::abs(blocks.w_plus.trace()) < 1e-10);
  CHECK(std::abs(blocks.w_minus.trace()) < 1e-10);
  // Operator norm is the tensor norm over 4.
  double n2 = 0.0, n2p = 0.0;
  for (double v : wf.entries()) n2 += v * v;
  for (double v : wp.entries()) n2p += v * v;
  CHECK(std::abs(blocks.w_plus.squaredNorm() - n2p / 4.0) < 1e-10);
  CHECK(std::abs(blocks.w_plus.squaredNorm() + blocks.w_minus.squaredNorm() - n2 / 4.0) < 1e-10);

  const Matrix6 full = curvature_operator_blocks(cp, fr);
  CHECK((full - full.transpose()).norm() < 1e-10);
  CHECK(std::abs(full.trace() - cp.scalar / 2.0) < 1e-10);

  TensorValue bad = wf;
  bad(0, 1, 0, 1) += 1.0;
  bad(1, 0, 1, 0) += 1.0;
  bad(0, 1, 1, 0) -= 1.0;
  bad(1, 0, 0, 1) -= 1.0;
  CHECK_THROWS_AS(weyl_blocks(bad, to_frame(cp.ricci, fr), cp.scalar), InconsistentInputError);
}

TEST_CASE("Kahler spectrum on CP2 and S2 x S2") {
  const FixtureSpec cp2 = fixture("cp2_fubini_study");
  const CurvaturePoint c = curvature_at(cp2.metric, {0.2, -0.3, 0.4, 0.1});
  CHECK(std::abs(c.scalar - 24.0) < 1e-9);
  const Frame fr = orthonormal_frame(c.g);
  const WeylBlocks b = weyl_blocks(to_frame(weyl_tensor(c), fr), to_frame(c.ricci, fr), c.scalar);
  const auto ev = sorted_eigenvalues(b.w_plus);
  CHECK(std::abs(ev[0] + 2.0) < 1e-9);
  CHECK(std::abs(ev[1] + 2.0) < 1e-9);
  CHECK(std::abs(ev[2] - 4.0) < 1e-9);
  CHECK(b.w_minus.norm() < 1e-9);

  const FixtureSpec prod = fixture("s2xs2", {{"a", 1.0}, {"b", 2.0}});
  const CurvaturePoint s = curvature_at(prod.metric, {0.3, 0.1, -0.5, 0.7});
  const double r = 2.0 + 0.5;
  CHECK(std::abs(s.scalar - r) < 1e-10);
  const Frame fs = orthonormal_frame(s.g);
  const WeylBlocks bs = weyl_blocks(to_frame(weyl_tensor(s), fs), to_frame(s.ricci, fs), s.scalar);
  for (const Matrix3* m : {&bs.w_plus, &bs.w_minus}) {
    const auto e = sorted_eigenvalues(*m);
    CHECK(std::abs(e[0] + r / 12.0) < 1e-10);
    CHECK(std::abs(e[1] + r / 12.0) < 1e-10);
    CHECK(std::abs(e[2] - r / 6.0) < 1e-10);
  }
}

TEST_CASE("divergence of W splits orthogonally") {
  std::mt19937_64 rng(43);
  const LocalGeometry geom(random_generic(rng), random_point(rng));
  const DivWeylSplit d = div_weyl_split(geom);
  CHECK(d.norm2 > 1e-6);
  CHECK(std::abs(d.norm2 - d.norm2_plus - d.norm2_minus) < 1e-10 * d.norm2);
  CHECK(max_abs(d.div_w - d.div_w_plus - d.div_w_minus) < 1e-11);
}

TEST_CASE("Weitzenbock formula on parallel W+") {
  const FixtureSpec cp2 = fixture("cp2_fubini_study");
  const WeitzenbockTerms t = weitzenbock_residual(LocalGeometry(cp2.metric, {0.1, 0.2, -0.1, 0.3}));
  CHECK(std::abs(t.norm2 - 24.0) < 1e-8);
  CHECK(std::abs(t.det - 16.0) < 1e-8);
  CHECK(std::abs(t.lhs) < 1e-7);
  CHECK(std::abs(t.grad_norm2) < 1e-7);
  CHECK(std::abs(t.residual) < 1e-7);
  CHECK_THROWS_AS(weitzenbock_residual(LocalGeometry(cp2.metric, {0, 0, 0, 0}, JetMode::taylor, 3)), OrderError);
}
