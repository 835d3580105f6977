#pragma once

// Four-dimensional machinery: oriented orthonormal frames, the Hodge star on
// 2-forms, the Lambda^+/- bases, and the self-dual / anti-self-dual parts of
// the Weyl tensor.
//
// Bivectors are 4x4 antisymmetric matrices of frame components, with inner
// product <a, b> = 1/2 sum_ij a_ij b_ij (so e^1 ^ e^2 has unit norm). The
// curvature operator on bivectors is
//     M(a, b) = 1/4 sum a_ij R_ijkl b_kl,
// which is the identity on the unit round sphere.

#include <Eigen/Dense>
#include <array>
#include <utility>

#include "cpecheck/curvature.hpp"

namespace cpecheck {

using Bivector = Eigen::Matrix4d;
using Matrix3 = Eigen::Matrix3d;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

struct Frame {
  Point point{};
  /// vectors(a, i): chart component i of e_a.
  Eigen::Matrix4d vectors;
  /// coframe(a, i): chart component i of the dual 1-form e^a.
  Eigen::Matrix4d coframe;
  int orientation = 1;
};

/// Gram-Schmidt on d_1, ..., d_4 in that order. Positively oriented with
/// respect to the chart.
Frame orthonormal_frame(const TensorValue& g, const Point& x = {});

/// Frame built from given chart vectors, orthonormalized in order.
Frame frame_from_vectors(const TensorValue& g, const Eigen::Matrix4d& rows, const Point& x = {});

/// Frame components T(e_a, e_b, ...) of an all-covariant tensor.
TensorValue to_frame(const TensorValue& t, const Frame& frame);
/// Inverse of to_frame for all-covariant tensors.
TensorValue from_frame(const TensorValue& t, const Frame& frame);

/// Frame components of a chart 2-form and back.
Bivector bivector_to_frame(const Bivector& chart, const Frame& frame);
Bivector bivector_from_frame(const Bivector& framed, const Frame& frame);

/// e^a ^ e^b in frame components (0-based indices).
Bivector wedge(int a, int b);

/// (*w)_ab = 1/2 eps_abcd w_cd in an oriented orthonormal frame.
Bivector hodge_star(const Bivector& framed);
/// Same for a 2-form given in chart components.
Bivector hodge_star(const Bivector& chart, const Frame& frame);

double bivector_inner(const Bivector& a, const Bivector& b);

/// The complementary pair (rb, sb) such that (r, s, rb, sb) is an even
/// permutation of (0, 1, 2, 3). Throws std::invalid_argument when r == s.
std::pair<int, int> dual_pair(int r, int s);

struct TwoFormSplit {
  /// (e12 + e34)/sqrt2, (e13 + e42)/sqrt2, (e32 + e41)/sqrt2 (1-based labels).
  std::array<Bivector, 3> lambda_plus;
  /// The same pairs with a minus sign.
  std::array<Bivector, 3> lambda_minus;
};

const TwoFormSplit& two_form_split();

/// Matrix of an algebraic curvature tensor (frame components) on the
/// six-dimensional space of bivectors, ordered Lambda^+ then Lambda^-.
Matrix6 bivector_operator(const TensorValue& framed);

struct WeylBlocks {
  Matrix3 w_plus;
  Matrix3 w_minus;
  /// Lambda^- -> Lambda^+ block of the curvature operator (Ricci part).
  Matrix3 ric_block;
  double scalar = 0.0;
};

/// W, Ric in frame components. Throws InconsistentInputError when W lacks
/// the curvature symmetries or is not trace free (1e-8 relative).
WeylBlocks weyl_blocks(const TensorValue& w_frame, const TensorValue& ric_frame, double scalar);

/// Full 6x6 curvature operator at a point.
Matrix6 curvature_operator_blocks(const CurvaturePoint& cp, const Frame& frame);

/// (0,4) self-dual part W+_abcd = 1/2 (W_abcd + 1/2 W_ab^ef eps_efcd) of a
/// jet tensor with the Riemannian volume form eps. `sign` = -1 gives W-.
TensorJet self_dual_part(const LocalGeometry& geom, const TensorJet& w, int sign = 1);

/// Frame-component form of the same projection: 1/2 (W_pqrs + W_pq rb sb).
TensorValue self_dual_part_frame(const TensorValue& w_frame, int sign = 1);

struct DivWeylSplit {
  TensorValue div_w;        // (0,3) chart components
  TensorValue div_w_plus;
  TensorValue div_w_minus;
  double norm2 = 0.0;       // |dW|^2 (metric norms)
  double norm2_plus = 0.0;
  double norm2_minus = 0.0;
};

DivWeylSplit div_weyl_split(const LocalGeometry& geom);

struct WeitzenbockTerms {
  double lhs = 0.0;             // Laplacian of |W+|^2
  double grad_norm2 = 0.0;      // |D W+|^2
  double norm2 = 0.0;           // |W+|^2
  double det = 0.0;             // det W+
  double scalar = 0.0;
  double rhs = 0.0;             // 2|D W+|^2 + R|W+|^2 - 36 det W+
  double residual = 0.0;        // lhs - rhs
};

/// All norms and the determinant use the 3x3 operator normalization on
/// Lambda^+ (tensor norms divided by 4). Needs metric jets of order 4.
WeitzenbockTerms weitzenbock_residual(const LocalGeometry& geom);

}  // namespace cpecheck
