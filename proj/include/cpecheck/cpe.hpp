#pragma once

// Quantities attached to a metric g with a potential f: the linearized
// adjoint of the scalar curvature map, the critical point equation
//     Ric - R/n g = Hess f - (Ric - R/(n-1) g) f,
// the tensor T, level-set geometry of f, and the self-dual Cotton chain.
//
// Every formula uses the scalar curvature at the evaluation point.

#include <array>
#include <vector>

#include "cpecheck/conformal.hpp"
#include "cpecheck/selfdual4.hpp"

namespace cpecheck {

inline constexpr double kRegularPointThreshold = 1e-8;

class CPEInstance {
 public:
  /// When `check_points` is non-empty, R is evaluated there and cached as
  /// their mean; `require_constant_r` then demands max relative deviation
  /// < 1e-6 (std::invalid_argument otherwise).
  CPEInstance(MetricField g, ScalarField f, const std::vector<Point>& check_points = {},
              bool require_constant_r = false, JetMode mode = JetMode::taylor);

  const MetricField& metric() const noexcept { return g_; }
  const ScalarField& potential() const noexcept { return f_; }
  int dim() const noexcept { return g_.dim(); }
  /// Cached mean scalar curvature (NaN when no check points were given).
  double scalar_curvature() const noexcept { return r_; }
  double scalar_curvature_spread() const noexcept { return spread_; }

 private:
  MetricField g_;
  ScalarField f_;
  double r_;
  double spread_ = 0.0;
};

/// Jets of g and f at one point, shared by the pointwise operations.
class CPEPoint {
 public:
  CPEPoint(const CPEInstance& inst, const Point& x, JetMode mode = JetMode::taylor, int order = kMaxJetOrder);

  const LocalGeometry& geometry() const noexcept { return geom_; }
  const Jet& f() const noexcept { return f_; }
  int dim() const noexcept { return geom_.dim(); }
  double scalar() const { return geom_.scalar().value(); }
  const TensorValue& g() const noexcept { return g_; }
  const TensorValue& g_inv() const noexcept { return g_inv_; }
  const TensorValue& ricci() const noexcept { return ric_; }
  /// (0,1) differential and (0,2) Hessian of f at the point.
  const TensorValue& df() const noexcept { return df_; }
  const TensorValue& hess() const noexcept { return hess_; }
  double laplacian() const noexcept { return lap_; }
  double grad_norm() const;

 private:
  LocalGeometry geom_;
  Jet f_;
  TensorValue g_, g_inv_, ric_, df_, hess_;
  double lap_ = 0.0;
};

/// -(Lap f) g + Hess f - f Ric.
TensorValue linearized_adjoint(const CPEPoint& p);
/// [Ric - R/n g] - [Hess f - (Ric - R/(n-1) g) f].
TensorValue cpe_residual(const CPEPoint& p);
/// L*(f) - (Ric - R/n g). Satisfies cpe_residual + this = -trace_residual g.
TensorValue cpe_residual_via_adjoint(const CPEPoint& p);
/// Lap f + R/(n-1) f; equals minus the trace of cpe_residual.
double trace_residual(const CPEPoint& p);

/// T_ijk = (n-1)/(n-2) (R_ik f_j - R_jk f_i) - 1/(n-2) (R_is f^s g_jk - R_js f^s g_ik)
///         - R/(n-2) (f_j g_ik - f_i g_jk).
TensorValue tensor_T(const CPEPoint& p);

/// (f+1) C_ijk - W_ijks f^s - T_ijk, reported raw.
TensorValue lemma21_residual(const CPEPoint& p);

struct TContraction {
  TensorValue contracted;  // T_ijk f^k
  TensorValue reduced;     // (R_ik f_j - R_jk f_i) f^k
};
TContraction t_contract_gradient(const CPEPoint& p);

struct RicciEigensystem {
  std::array<double, 4> eigenvalues{};   // ascending
  Eigen::Matrix4d basis;                 // rows: orthonormal eigenvectors in frame components
  std::array<double, 4> gradient{};      // f_k in the eigenbasis
  std::array<double, 3> residuals{};
};

/// The three bilinear combinations
///   (l1-l2) f1 f2 + (l3-l4) f3 f4, (l1-l3) f1 f3 + (l4-l2) f4 f2, (l1-l4) f1 f4 + (l2-l3) f2 f3.
std::array<double, 3> eigensystem_combinations(const std::array<double, 4>& lambda, const std::array<double, 4>& df);

/// Throws CriticalPointError when |grad f| < kRegularPointThreshold.
RicciEigensystem ricci_eigensystem_residual(const CPEPoint& p);

struct LevelSetData {
  Point point{};
  Frame frame;              // e_1 = grad f / |grad f|
  Matrix3 h;                // h_ab = -Hess f(e_a, e_b) / |grad f|, a, b tangent
  double mean_curvature = 0.0;       // trace h
  double mean_curvature_grad2 = 0.0; // (f_11 - Lap f) / |grad f|^2, f_11 = Hess f(e_1, e_1)
  double grad_norm = 0.0;
  double umbilic_defect = 0.0;       // |h - (H/3) I|
};

/// Adapted frame: e_1 along grad f, completed by Gram-Schmidt with the
/// coordinate vectors that are least parallel to what is already spanned.
Frame adapted_frame(const CPEPoint& p);

LevelSetData level_set_geometry(const CPEPoint& p);

/// R_abc1 - (D_b h_ac - D_a h_bc) in the adapted frame, tangent indices only
/// (a 3-dimensional (0,3) tensor). Needs jets of order 3.
TensorValue codazzi_residual(const CPEPoint& p);

struct GradientNormConstancy {
  double deviation = 0.0;        // max pairwise spread of |grad f|^2
  double tangential_max = 0.0;   // max |e_a(|grad f|^2)| over tangent a
  double cpe_rhs_max = 0.0;    // max |(f+1) Ric0(grad f, e_a) - R f/(n(n-1)) g(grad f, e_a)|
  double factor_residual_max = 0.0;  // max |e_a(|grad f|^2) - 2 Hess f(grad f, e_a)|
};

/// Points must lie on one level set of f (|f - f(p_0)| < 1e-8), otherwise
/// std::invalid_argument.
GradientNormConstancy gradient_norm_constancy(const CPEInstance& inst, const std::vector<Point>& points,
                                              JetMode mode = JetMode::taylor);

struct CottonChain {
  TensorValue residual1;  // 4 dW+_jkl - (C_klj + C_{kb lb j}), frame components
  TensorValue residual2;  // (T_ijk + T_{ib jb k}) f^k, frame components
};

CottonChain delta_wplus_cotton_chain(const CPEPoint& p);

}  // namespace cpecheck
