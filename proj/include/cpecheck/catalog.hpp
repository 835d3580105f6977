#pragma once

// Canonical metrics with known geometry, random fixture generators, seeded
// sampling and the total scalar curvature quadrature.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cpecheck/fields.hpp"

namespace cpecheck {

/// Expected values recorded with a fixture; unset fields are unknown.
struct KnownFacts {
  std::optional<double> scalar_curvature;
  std::optional<bool> einstein;
  std::optional<bool> weyl_zero;
  std::optional<bool> w_minus_zero;
  std::optional<bool> cotton_zero;
  /// Ascending eigenvalues of W+ on Lambda^+ (operator normalization).
  std::optional<std::array<double, 3>> w_plus_spectrum;
  std::optional<std::array<double, 3>> w_minus_spectrum;
  /// Ascending eigenvalues of Ric with respect to g.
  std::optional<std::array<double, 4>> ricci_eigenvalues;
  std::optional<double> volume;
  std::optional<double> total_scalar_curvature;
};

/// Region integrated by total_scalar_curvature.
struct QuadratureDomain {
  /// true: the whole chart R^4 mapped per axis by x = scale * tan(u),
  /// truncated at |x| <= radius. false: the finite box.
  bool whole_chart = false;
  std::array<double, 4> scale{1.0, 1.0, 1.0, 1.0};
  double radius = 0.0;
  Box box;
};

struct FixtureSpec {
  std::string id;
  std::map<std::string, double> params;
  MetricField metric;
  /// Named potentials in declaration order.
  std::vector<std::pair<std::string, ScalarField>> potentials;
  KnownFacts facts;
  /// Safe sub-box for sampling.
  Box sample_box;
  QuadratureDomain quadrature;

  const ScalarField& potential(const std::string& name) const;
};

/// A fixture id with numeric parameters; `base` is used by "perturbed".
struct FixtureRequest {
  std::string id;
  std::map<std::string, double> params;
  std::shared_ptr<FixtureRequest> base;
};

/// Ids: s4_round(r), flat_torus, cp2_fubini_study(scale), s2xs2(a, b),
/// conformal_flat(seed, amplitude), perturbed(eps, seed, width, c1..c4; base).
/// Throws std::invalid_argument for unknown ids or out-of-range parameters.
FixtureSpec make_fixture(const FixtureRequest& request);
FixtureSpec fixture(const std::string& id, const std::map<std::string, double>& params = {});

/// kind in {conformal_flat, perturbed}; perturbed uses s4_round(1) as base.
FixtureSpec random_fixture(const std::string& kind, std::uint64_t seed);

/// ε times a compactly supported bump prod_v (1 - ((x_v - c_v)/w)^2)^3 times
/// a random symmetric pattern, added to the base metric. The domain shrinks to
/// the bump support. Positive definiteness is re-checked on a grid; failures
/// redraw the pattern with a fresh sub-seed (bounded retries).
FixtureSpec perturbed(const FixtureSpec& base, double eps, std::uint64_t seed, double width = 1.0,
                      const Point& center = {});

struct FixtureInfo {
  std::string id;
  std::vector<std::pair<std::string, double>> params;  // name, default
  std::string description;
};
const std::vector<FixtureInfo>& fixture_catalog();

/// Uniform double in [0, 1) from a 64-bit engine, independent of the
/// standard library's distribution implementation.
double unit_uniform(std::uint64_t bits);

/// Random polynomial of total degree <= 3 with coefficients in [-a, a].
Expr random_polynomial(std::uint64_t seed, double amplitude = 0.3);

/// Random cubic potential with a dominant linear part, so that sample points
/// are regular with overwhelming probability.
ScalarField random_potential(std::uint64_t seed);

/// Sobol points with a seeded random shift (mod 1), mapped into the box.
std::vector<Point> sample_points(const Box& box, int count, std::uint64_t seed);

struct QuadratureSpec {
  int min_order = 8;
  int max_order = 40;
  int order_step = 4;
  double rel_tol = 1e-4;
  int threads = 1;
  /// Overrides the fixture's truncation radius when set.
  std::optional<double> radius;
};

struct QuadratureResult {
  double total_scalar_curvature = 0.0;
  double volume = 0.0;
  int order = 0;
  double radius = 0.0;
  double rel_change = 0.0;
};

/// S = int R dV and Vol = int dV with tensor Gauss-Legendre rules, raising
/// the order until both change by less than rel_tol. Throws QuadratureError
/// when the refinement does not settle or the integrand is not finite.
QuadratureResult total_scalar_curvature(const FixtureSpec& fixture, const QuadratureSpec& spec = {});

/// Newton projection of x onto {f = c} along the Euclidean chart gradient.
Point project_to_level_set(const ScalarField& f, Point x, double c, int dim = 4);

}  // namespace cpecheck
