#pragma once

// Levi-Civita connection and curvature of a chart metric, computed on jets
// around a point so that covariant derivatives of curvature are available.
//
// Conventions:
//   Gamma^a_bc = 1/2 g^ad (d_b g_dc + d_c g_db - d_d g_bc)
//   R^a_bcd    = d_c Gamma^a_db - d_d Gamma^a_cb + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb
//   R_abcd     = g_ae R^e_bcd,   Ric_bd = g^ac R_abcd,   R = g^bd Ric_bd
// so the unit round sphere has R_abcd = g_ac g_bd - g_ad g_bc, Ric = 3g, R = 12.
// Covariant derivatives put the new (derivative) slot first.

#include "cpecheck/fields.hpp"

namespace cpecheck {

/// Point values of the curvature pipeline.
struct CurvaturePoint {
  Point point{};
  TensorValue g;            // (0,2)
  TensorValue g_inv;        // (2,0)
  TensorValue christoffel;  // (1,2): Gamma^a_bc
  TensorValue riemann;      // (0,4)
  TensorValue ricci;        // (0,2)
  double scalar = 0.0;
};

/// Smallest truncation order among the entries of a jet tensor.
int jet_order(const TensorJet& t);

class LocalGeometry {
 public:
  /// Expands the metric to `order` (<= 4) around x. Throws DegenerateMetricError
  /// when g(x) is not positive definite.
  LocalGeometry(const MetricField& g, const Point& x, JetMode mode = JetMode::taylor, int order = kMaxJetOrder);
  /// From an already expanded metric.
  LocalGeometry(TensorJet metric_jet, const Point& x, JetMode mode = JetMode::taylor);

  int dim() const noexcept { return dim_; }
  const Point& point() const noexcept { return point_; }
  JetMode mode() const noexcept { return mode_; }
  int metric_order() const noexcept { return order_; }

  const TensorJet& metric() const noexcept { return g_; }
  const TensorJet& inverse_metric() const noexcept { return g_inv_; }
  const TensorJet& christoffel() const noexcept { return gamma_; }
  /// Order metric_order - 2.
  const TensorJet& riemann() const noexcept { return riemann_; }
  const TensorJet& ricci() const noexcept { return ricci_; }
  const Jet& scalar() const noexcept { return scalar_; }

  /// sqrt(det g) as a jet (the volume density in the chart).
  Jet volume_density() const;

  /// Covariant derivative of a jet tensor field; the result has one more
  /// covariant slot in front and its order drops by one.
  TensorJet covariant_derivative(const TensorJet& t) const;
  /// (0,1) differential of a scalar jet.
  TensorJet gradient(const Jet& f) const;
  /// (0,2) Hessian; order drops by two.
  TensorJet hessian(const Jet& f) const;
  Jet laplacian(const Jet& f) const;

  CurvaturePoint at_point() const;

 private:
  void build();

  int dim_ = 0;
  Point point_{};
  JetMode mode_ = JetMode::taylor;
  int order_ = 0;
  TensorJet g_, g_inv_, gamma_, riemann_, ricci_;
  Jet scalar_;
};

/// Throws OrderError unless `available` >= `needed`.
void require_order(int available, int needed, const char* what);

/// Curvature at a point (metric expanded to order 2).
CurvaturePoint curvature_at(const MetricField& g, const Point& x, JetMode mode = JetMode::taylor);

struct HessianLaplacian {
  TensorValue hessian;
  double laplacian = 0.0;
};

HessianLaplacian hessian_laplacian(const ScalarField& f, const MetricField& g, const Point& x,
                                   JetMode mode = JetMode::taylor);

/// Scalar curvature only, with plain double arithmetic on a second-order
/// metric jet. Used where many point evaluations are needed (quadrature).
double scalar_curvature_fast(const MetricField& g, const Point& x, double* volume_density = nullptr);

}  // namespace cpecheck
