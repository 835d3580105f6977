#include "cpecheck/conformal.hpp"

namespace cpecheck {

TensorValue weyl_tensor(const CurvaturePoint& cp) { return weyl_tensor(cp.riemann, cp.ricci, cp.scalar, cp.g); }

TensorValue schouten_tensor(const CurvaturePoint& cp) { return schouten_tensor(cp.ricci, cp.scalar, cp.g); }

TensorJet weyl_jet(const LocalGeometry& geom) {
  return weyl_tensor(geom.riemann(), geom.ricci(), geom.scalar(), geom.metric());
}

TensorJet cotton_jet(const LocalGeometry& geom) {
  require_order(geom.metric_order(), 3, "Cotton tensor");
  const int n = geom.dim();
  const TensorJet dric = geom.covariant_derivative(geom.ricci());
  const TensorJet dr = geom.gradient(geom.scalar());
  const TensorJet& g = geom.metric();
  const double c = 1.0 / (2.0 * (n - 1));
  TensorJet out(n, covariant(3));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Jet v = dric(i, j, k) - dric(j, i, k);
        v.add_product(dr(i), g(j, k), -c);
        v.add_product(dr(j), g(i, k), c);
        out(i, j, k) = v;
      }
  return out;
}

TensorValue cotton_tensor(const LocalGeometry& geom) { return value_of(cotton_jet(geom)); }

TensorValue cotton_tensor(const MetricField& g, const Point& x, JetMode mode) {
  return cotton_tensor(LocalGeometry(g, x, mode, 3));
}

TensorValue schouten_cotton(const LocalGeometry& geom) {
  require_order(geom.metric_order(), 3, "Schouten derivative");
  const int n = geom.dim();
  const TensorValue da = value_of(geom.covariant_derivative(schouten_tensor(geom.ricci(), geom.scalar(), geom.metric())));
  TensorValue out(n, covariant(3));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out(i, j, k) = (n - 2) * (da(i, j, k) - da(j, i, k));
  return out;
}

TensorJet divergence_jet(const LocalGeometry& geom, const TensorJet& t) {
  if (t.rank() != 4) throw std::invalid_argument("divergence_four_tensor: rank-4 tensor required");
  return contract(geom.covariant_derivative(t), 0, 1, &geom.inverse_metric());
}

TensorValue divergence_four_tensor(const LocalGeometry& geom, const TensorJet& t) {
  return value_of(divergence_jet(geom, t));
}

TensorValue cotton_weyl_residual(const LocalGeometry& geom) {
  const int n = geom.dim();
  if (n < 4) throw std::invalid_argument("the Cotton-Weyl relation needs dimension >= 4");
  const TensorValue c = cotton_tensor(geom);
  const TensorValue dw = value_of(contract(geom.covariant_derivative(weyl_jet(geom)), 0, 4, &geom.inverse_metric()));
  const double k = (n - 2.0) / (n - 3.0);
  TensorValue out = c;
  for (std::size_t i = 0; i < out.size(); ++i) out.entries()[i] += k * dw.entries()[i];
  return out;
}

}  // namespace cpecheck
