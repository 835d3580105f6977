#pragma once

// Shared fixtures for unit tests, built directly from expressions so that the
// catalog module is not needed as an oracle.

#include <random>

#include "cpecheck/fields.hpp"

namespace testing_support {

using namespace cpecheck;

inline Expr x(int i) { return Expr::var(i); }

inline Expr radius2(int dim = 4) {
  Expr s = 0.0;
  for (int i = 0; i < dim; ++i) s = s + x(i) * x(i);
  return s;
}

/// Round sphere of radius r in the stereographic chart.
inline MetricField sphere(double r = 1.0) {
  const Expr c = 4.0 * std::pow(r, 4) / ((r * r + radius2()) * (r * r + radius2()));
  return MetricField::conformally_flat(4, 0.5 * log(c));
}

inline MetricField sphere_direct(double r = 1.0) {
  const Expr c = 4.0 * std::pow(r, 4) / ((r * r + radius2()) * (r * r + radius2()));
  std::vector<Expr> upper;
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) upper.push_back(i == j ? c : Expr(0.0));
  }
  return MetricField::from_upper(4, upper);
}

/// (1 - |x|^2) / (1 + |x|^2), the last height function of the unit sphere.
inline Expr sphere_height() { return (1.0 - radius2()) / (1.0 + radius2()); }

inline MetricField euclidean(int dim = 4) {
  std::vector<Expr> upper;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) upper.push_back(i == j ? 1.0 : 0.0);
  }
  return MetricField::from_upper(dim, upper);
}

/// Random cubic polynomial with coefficients in [-a, a].
inline Expr random_cubic(std::mt19937_64& rng, double a = 0.3) {
  std::uniform_real_distribution<double> u(-a, a);
  Expr p = u(rng);
  for (int i = 0; i < 4; ++i) {
    p = p + u(rng) * x(i);
    for (int j = i; j < 4; ++j) {
      p = p + u(rng) * x(i) * x(j);
      for (int k = j; k < 4; ++k) p = p + u(rng) * x(i) * x(j) * x(k);
    }
  }
  return p;
}

/// A generic (not conformally flat) metric: identity plus small smooth
/// symmetric perturbations.
inline MetricField random_generic(std::mt19937_64& rng, double eps = 0.15) {
  std::vector<Expr> upper;
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      Expr e = eps * sin(random_cubic(rng, 1.0));
      if (i == j) e = e + 1.0;
      upper.push_back(e);
    }
  }
  return MetricField::from_upper(4, upper);
}

inline Point random_point(std::mt19937_64& rng, double a = 0.5) {
  std::uniform_real_distribution<double> u(-a, a);
  return {u(rng), u(rng), u(rng), u(rng)};
}

}  // namespace testing_support
