#include "cpecheck/selfdual4.hpp"

#include <cmath>

#include "cpecheck/conformal.hpp"
#include "cpecheck/errors.hpp"

namespace cpecheck {
namespace {

void require_dim4(int n) {
  if (n != 4) throw std::invalid_argument("self-duality is only defined in dimension 4");
}

int permutation_sign(const std::array<int, 4>& p) {
  int inversions = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (p[i] > p[j]) ++inversions;
  return inversions % 2 == 0 ? 1 : -1;
}

int levi_civita(int a, int b, int c, int d) {
  if (a == b || a == c || a == d || b == c || b == d || c == d) return 0;
  return permutation_sign({a, b, c, d});
}

double g_inner(const TensorValue& g, const Eigen::Vector4d& u, const Eigen::Vector4d& v) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s += u[i] * g(i, j) * v[j];
  return s;
}

Frame finish_frame(const TensorValue& g, const Eigen::Matrix4d& e, const Point& x) {
  Frame f;
  f.point = x;
  f.vectors = e;
  Eigen::Matrix4d gm;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) gm(i, j) = g(i, j);
  f.coframe = e * gm;
  f.orientation = 1;
  return f;
}

// Replaces slot s of t by sum_i m(a, i) t(.., i, ..).
TensorValue transform_slot(const TensorValue& t, int s, const Eigen::Matrix4d& m) {
  const int n = t.dim();
  TensorValue out(n, t.variance());
  std::size_t stride = 1;
  for (int k = t.rank() - 1; k > s; --k) stride *= static_cast<std::size_t>(n);
  for (std::size_t o = 0; o < out.size(); ++o) {
    const int a = static_cast<int>((o / stride) % static_cast<std::size_t>(n));
    const std::size_t base = o - static_cast<std::size_t>(a) * stride;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += m(a, i) * t.entries()[base + static_cast<std::size_t>(i) * stride];
    out.entries()[o] = acc;
  }
  return out;
}

}  // namespace

Frame frame_from_vectors(const TensorValue& g, const Eigen::Matrix4d& rows, const Point& x) {
  require_dim4(g.dim());
  Eigen::Matrix4d e;
  for (int a = 0; a < 4; ++a) {
    Eigen::Vector4d v = rows.row(a).transpose();
    for (int b = 0; b < a; ++b) {
      const Eigen::Vector4d eb = e.row(b).transpose();
      v -= g_inner(g, v, eb) * eb;
    }
    const double n2 = g_inner(g, v, v);
    const double ref = g_inner(g, rows.row(a).transpose(), rows.row(a).transpose());
    if (!(n2 > 1e-24 * std::max(ref, 1e-300))) throw DegenerateMetricError("frame vectors are linearly dependent");
    e.row(a) = v.transpose() / std::sqrt(n2);
  }
  if (e.determinant() < 0.0) e.row(3) *= -1.0;
  return finish_frame(g, e, x);
}

Frame orthonormal_frame(const TensorValue& g, const Point& x) {
  require_dim4(g.dim());
  Eigen::Matrix4d gm;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) gm(i, j) = g(i, j);
  Eigen::LLT<Eigen::Matrix4d> llt(gm);
  if (llt.info() != Eigen::Success) throw DegenerateMetricError("metric is not positive definite");
  return frame_from_vectors(g, Eigen::Matrix4d::Identity(), x);
}

TensorValue to_frame(const TensorValue& t, const Frame& frame) {
  for (int s = 0; s < t.rank(); ++s)
    if (t.slot(s) != Slot::covariant) throw std::invalid_argument("to_frame: all slots must be covariant");
  TensorValue out = t;
  for (int s = 0; s < t.rank(); ++s) out = transform_slot(out, s, frame.vectors);
  return out;
}

TensorValue from_frame(const TensorValue& t, const Frame& frame) {
  TensorValue out = t;
  const Eigen::Matrix4d back = frame.coframe.transpose();
  for (int s = 0; s < t.rank(); ++s) out = transform_slot(out, s, back);
  return out;
}

Bivector bivector_to_frame(const Bivector& chart, const Frame& frame) {
  return frame.vectors * chart * frame.vectors.transpose();
}

Bivector bivector_from_frame(const Bivector& framed, const Frame& frame) {
  return frame.coframe.transpose() * framed * frame.coframe;
}

Bivector wedge(int a, int b) {
  Bivector w = Bivector::Zero();
  w(a, b) += 1.0;
  w(b, a) -= 1.0;
  return w;
}

Bivector hodge_star(const Bivector& w) {
  Bivector out = Bivector::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) out(a, b) += 0.5 * levi_civita(a, b, c, d) * w(c, d);
  return out;
}

Bivector hodge_star(const Bivector& chart, const Frame& frame) {
  return bivector_from_frame(hodge_star(bivector_to_frame(chart, frame)), frame);
}

double bivector_inner(const Bivector& a, const Bivector& b) { return 0.5 * (a.array() * b.array()).sum(); }

std::pair<int, int> dual_pair(int r, int s) {
  if (r < 0 || r > 3 || s < 0 || s > 3) throw std::invalid_argument("dual_pair: index out of range");
  if (r == s) throw std::invalid_argument("dual_pair: indices must differ");
  std::array<int, 2> rest{};
  int k = 0;
  for (int i = 0; i < 4; ++i)
    if (i != r && i != s) rest[static_cast<std::size_t>(k++)] = i;
  if (permutation_sign({r, s, rest[0], rest[1]}) > 0) return {rest[0], rest[1]};
  return {rest[1], rest[0]};
}

const TwoFormSplit& two_form_split() {
  static const TwoFormSplit split = [] {
    const double c = 1.0 / std::sqrt(2.0);
    TwoFormSplit s;
    const std::array<std::array<int, 4>, 3> pairs{{{0, 1, 2, 3}, {0, 2, 3, 1}, {2, 1, 3, 0}}};
    for (std::size_t k = 0; k < 3; ++k) {
      const auto& p = pairs[k];
      s.lambda_plus[k] = c * (wedge(p[0], p[1]) + wedge(p[2], p[3]));
      s.lambda_minus[k] = c * (wedge(p[0], p[1]) - wedge(p[2], p[3]));
    }
    return s;
  }();
  return split;
}

Matrix6 bivector_operator(const TensorValue& r) {
  require_dim4(r.dim());
  const TwoFormSplit& s = two_form_split();
  std::array<Bivector, 6> basis{s.lambda_plus[0],  s.lambda_plus[1],  s.lambda_plus[2],
                                s.lambda_minus[0], s.lambda_minus[1], s.lambda_minus[2]};
  // r applied to each basis bivector: (R b)_ij = 1/2 sum_kl R_ijkl b_kl
  Matrix6 m;
  for (int beta = 0; beta < 6; ++beta) {
    Bivector rb = Bivector::Zero();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k)
          for (int l = 0; l < 4; ++l) acc += r(i, j, k, l) * basis[static_cast<std::size_t>(beta)](k, l);
        rb(i, j) = 0.5 * acc;
      }
    for (int alpha = 0; alpha < 6; ++alpha) m(alpha, beta) = bivector_inner(basis[static_cast<std::size_t>(alpha)], rb);
  }
  return m;
}

WeylBlocks weyl_blocks(const TensorValue& w, const TensorValue& ric, double scalar) {
  require_dim4(w.dim());
  const double scale = std::max(1.0, max_abs(w));
  if (symmetry_violation(w, Symmetry::riemann) > 1e-8) {
    throw InconsistentInputError("Weyl tensor violates the curvature symmetries");
  }
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double tr = 0.0;
      for (int c = 0; c < 4; ++c) tr += w(c, a, c, b);
      if (std::abs(tr) > 1e-8 * scale) throw InconsistentInputError("Weyl tensor is not trace free");
    }
  TensorValue p(4, covariant(4));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
          const double d_ik = i == k, d_jl = j == l, d_il = i == l, d_jk = j == k;
          p(i, j, k, l) = 0.5 * (ric(i, k) * d_jl + ric(j, l) * d_ik - ric(i, l) * d_jk - ric(j, k) * d_il) -
                          scalar / 6.0 * (d_jl * d_ik - d_il * d_jk);
        }
  const Matrix6 mw = bivector_operator(w);
  const Matrix6 mp = bivector_operator(p);
  WeylBlocks blocks;
  blocks.w_plus = mw.topLeftCorner<3, 3>();
  blocks.w_minus = mw.bottomRightCorner<3, 3>();
  blocks.ric_block = mp.topRightCorner<3, 3>();
  blocks.scalar = scalar;
  return blocks;
}

Matrix6 curvature_operator_blocks(const CurvaturePoint& cp, const Frame& frame) {
  return bivector_operator(to_frame(cp.riemann, frame));
}

TensorJet self_dual_part(const LocalGeometry& geom, const TensorJet& w, int sign) {
  require_dim4(geom.dim());
  if (sign != 1 && sign != -1) throw std::invalid_argument("self_dual_part: sign must be +1 or -1");
  const Jet vol = geom.volume_density();
  const TensorJet up = raise(raise(w, 2, geom.inverse_metric()), 3, geom.inverse_metric());
  TensorJet out(4, covariant(4));
  for (int c = 0; c < 4; ++c)
    for (int d = 0; d < 4; ++d) {
      if (c == d) continue;
      // Only (e, f) = (p, q), (q, p) with {p, q} the complement of {c, d} contribute.
      const auto [p, q] = dual_pair(c, d);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          Jet x = up(a, b, p, q) * vol;
          x *= static_cast<double>(levi_civita(p, q, c, d));
          out(a, b, c, d) = 0.5 * (w(a, b, c, d) + sign * x);
        }
    }
  for (int c = 0; c < 4; ++c)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) out(a, b, c, c) = 0.5 * w(a, b, c, c);
  return out;
}

TensorValue self_dual_part_frame(const TensorValue& w, int sign) {
  require_dim4(w.dim());
  TensorValue out(4, covariant(4));
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q)
      for (int r = 0; r < 4; ++r)
        for (int s = 0; s < 4; ++s) {
          double v = w(p, q, r, s);
          if (r != s) {
            const auto [rb, sb] = dual_pair(r, s);
            v += sign * w(p, q, rb, sb);
          }
          out(p, q, r, s) = 0.5 * v;
        }
  return out;
}

DivWeylSplit div_weyl_split(const LocalGeometry& geom) {
  require_dim4(geom.dim());
  require_order(geom.metric_order(), 3, "divergence of the Weyl tensor");
  const TensorJet w = weyl_jet(geom);
  DivWeylSplit out;
  out.div_w = value_of(divergence_jet(geom, w));
  out.div_w_plus = value_of(divergence_jet(geom, self_dual_part(geom, w, 1)));
  out.div_w_minus = value_of(divergence_jet(geom, self_dual_part(geom, w, -1)));
  const TensorValue g = value_of(geom.metric());
  const TensorValue gi = value_of(geom.inverse_metric());
  out.norm2 = metric_inner(out.div_w, out.div_w, g, gi);
  out.norm2_plus = metric_inner(out.div_w_plus, out.div_w_plus, g, gi);
  out.norm2_minus = metric_inner(out.div_w_minus, out.div_w_minus, g, gi);
  return out;
}

WeitzenbockTerms weitzenbock_residual(const LocalGeometry& geom) {
  require_dim4(geom.dim());
  require_order(geom.metric_order(), 4, "Weitzenbock formula");
  const TensorJet wp = self_dual_part(geom, weyl_jet(geom), 1);
  const TensorJet wp_up = raise_all(wp, geom.inverse_metric());
  Jet norm2 = Jet::zero(jet_order(wp));
  for (std::size_t k = 0; k < wp.size(); ++k) norm2.add_product(wp.entries()[k], wp_up.entries()[k], 0.25);

  const TensorValue g = value_of(geom.metric());
  const TensorValue gi = value_of(geom.inverse_metric());
  const TensorValue dwp = value_of(geom.covariant_derivative(wp));

  WeitzenbockTerms t;
  t.lhs = geom.laplacian(norm2).value();
  t.grad_norm2 = 0.25 * metric_inner(dwp, dwp, g, gi);
  t.norm2 = norm2.value();
  t.scalar = geom.scalar().value();
  const Frame frame = orthonormal_frame(g, geom.point());
  const Matrix6 m = bivector_operator(to_frame(value_of(wp), frame));
  t.det = m.topLeftCorner<3, 3>().determinant();
  t.rhs = 2.0 * t.grad_norm2 + t.scalar * t.norm2 - 36.0 * t.det;
  t.residual = t.lhs - t.rhs;
  return t;
}

}  // namespace cpecheck
