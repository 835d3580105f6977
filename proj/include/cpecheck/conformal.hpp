#pragma once

// Weyl, Schouten and Cotton tensors, and the divergence of (0,4) fields.

#include "cpecheck/curvature.hpp"

namespace cpecheck {

/// W = Riem - (Ric-part) + (scalar-part), i.e. the remainder of
///   R_ijkl = W_ijkl + 1/(n-2) (R_ik g_jl + R_jl g_ik - R_il g_jk - R_jk g_il)
///            - R/((n-1)(n-2)) (g_jl g_ik - g_il g_jk).
template <class Scalar>
BasicTensor<Scalar> weyl_tensor(const BasicTensor<Scalar>& riemann, const BasicTensor<Scalar>& ricci,
                                const Scalar& scalar, const BasicTensor<Scalar>& g) {
  const int n = g.dim();
  if (n < 3) throw std::invalid_argument("the Weyl tensor needs dimension >= 3");
  const double a = 1.0 / (n - 2);
  const double b = 1.0 / ((n - 1.0) * (n - 2.0));
  BasicTensor<Scalar> w = riemann;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          Scalar ric = ricci(i, k) * g(j, l);
          ric += ricci(j, l) * g(i, k);
          ric -= ricci(i, l) * g(j, k);
          ric -= ricci(j, k) * g(i, l);
          Scalar gg = g(j, l) * g(i, k);
          gg -= g(i, l) * g(j, k);
          w(i, j, k, l) -= a * ric;
          w(i, j, k, l) += b * (scalar * gg);
        }
  return w;
}

/// A_ij = (R_ij - R g_ij / (2(n-1))) / (n-2).
template <class Scalar>
BasicTensor<Scalar> schouten_tensor(const BasicTensor<Scalar>& ricci, const Scalar& scalar,
                                    const BasicTensor<Scalar>& g) {
  const int n = g.dim();
  if (n < 3) throw std::invalid_argument("the Schouten tensor needs dimension >= 3");
  BasicTensor<Scalar> a(n, covariant(2));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = (ricci(i, j) - (scalar * g(i, j)) / (2.0 * (n - 1))) / double(n - 2);
  return a;
}

TensorValue weyl_tensor(const CurvaturePoint& cp);
TensorValue schouten_tensor(const CurvaturePoint& cp);

/// Weyl tensor as a jet field (order metric_order - 2).
TensorJet weyl_jet(const LocalGeometry& geom);

/// C_ijk = d_i R_jk - d_j R_ik - (d_i R g_jk - d_j R g_ik) / (2(n-1)),
/// with covariant derivatives. Jet order metric_order - 3.
TensorJet cotton_jet(const LocalGeometry& geom);
TensorValue cotton_tensor(const LocalGeometry& geom);
TensorValue cotton_tensor(const MetricField& g, const Point& x, JetMode mode = JetMode::taylor);

/// (n-2) (d_i A_jk - d_j A_ik); equals the Cotton tensor identically.
TensorValue schouten_cotton(const LocalGeometry& geom);

/// (dT)_abc = g^{ye} (D_y T)_{eabc}: the trace of the derivative slot against
/// the first slot of T.
TensorJet divergence_jet(const LocalGeometry& geom, const TensorJet& t);
TensorValue divergence_four_tensor(const LocalGeometry& geom, const TensorJet& t);

/// C_ijk + (n-2)/(n-3) g^{lm} D_l W_ijkm. The contraction hits the
/// last slot of W; with the first-slot divergence above this reads
/// C_ijk = (n-2)/(n-3) (dW)_kij.
TensorValue cotton_weyl_residual(const LocalGeometry& geom);

}  // namespace cpecheck
