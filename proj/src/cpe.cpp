#include "cpecheck/cpe.hpp"

#include <cmath>
#include <limits>

#include "cpecheck/errors.hpp"

namespace cpecheck {

CPEInstance::CPEInstance(MetricField g, ScalarField f, const std::vector<Point>& check_points, bool require_constant_r,
                         JetMode mode)
    : g_(std::move(g)), f_(std::move(f)), r_(std::numeric_limits<double>::quiet_NaN()) {
  if (check_points.empty()) {
    if (require_constant_r) throw std::invalid_argument("CPEInstance: constant R can only be checked at given points");
    return;
  }
  std::vector<double> rs;
  double sum = 0.0;
  for (const Point& p : check_points) {
    rs.push_back(curvature_at(g_, p, mode).scalar);
    sum += rs.back();
  }
  r_ = sum / static_cast<double>(rs.size());
  for (double r : rs) spread_ = std::max(spread_, std::abs(r - r_) / std::max(1.0, std::abs(r_)));
  if (require_constant_r && spread_ > 1e-6) {
    throw std::invalid_argument("CPEInstance: scalar curvature is not constant (relative spread " +
                                std::to_string(spread_) + ")");
  }
}

CPEPoint::CPEPoint(const CPEInstance& inst, const Point& x, JetMode mode, int order)
    : geom_(inst.metric(), x, mode, order), f_(scalar_jet(inst.potential(), x, order, mode)) {
  g_ = value_of(geom_.metric());
  g_inv_ = value_of(geom_.inverse_metric());
  ric_ = value_of(geom_.ricci());
  df_ = value_of(geom_.gradient(f_));
  hess_ = value_of(geom_.hessian(f_));
  lap_ = geom_.laplacian(f_).value();
}

double CPEPoint::grad_norm() const {
  double s = 0.0;
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j) s += g_inv_(i, j) * df_(i) * df_(j);
  return std::sqrt(std::max(s, 0.0));
}

namespace {

TensorValue raised_gradient(const CPEPoint& p) { return contract(outer(p.g_inv(), p.df()), 1, 2); }

void require_regular(const CPEPoint& p) {
  const double n = p.grad_norm();
  if (!(n >= kRegularPointThreshold)) {
    throw CriticalPointError("|grad f| = " + std::to_string(n) + " is below the regular-point threshold");
  }
}

Eigen::Vector4d frame_vector(const Frame& fr, const TensorValue& covector) {
  Eigen::Vector4d out;
  for (int a = 0; a < 4; ++a) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += fr.vectors(a, i) * covector(i);
    out[a] = s;
  }
  return out;
}

}  // namespace

TensorValue linearized_adjoint(const CPEPoint& p) {
  const int n = p.dim();
  const double f = p.f().value();
  TensorValue out(n, covariant(2));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = -p.laplacian() * p.g()(i, j) + p.hess()(i, j) - f * p.ricci()(i, j);
  return out;
}

TensorValue cpe_residual(const CPEPoint& p) {
  const int n = p.dim();
  const double f = p.f().value();
  const double r = p.scalar();
  TensorValue out(n, covariant(2));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double lhs = p.ricci()(i, j) - r / n * p.g()(i, j);
      const double rhs = p.hess()(i, j) - (p.ricci()(i, j) - r / (n - 1) * p.g()(i, j)) * f;
      out(i, j) = lhs - rhs;
    }
  return out;
}

TensorValue cpe_residual_via_adjoint(const CPEPoint& p) {
  const int n = p.dim();
  const double r = p.scalar();
  TensorValue out = linearized_adjoint(p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) -= p.ricci()(i, j) - r / n * p.g()(i, j);
  return out;
}

double trace_residual(const CPEPoint& p) { return p.laplacian() + p.scalar() / (p.dim() - 1) * p.f().value(); }

TensorValue tensor_T(const CPEPoint& p) {
  const int n = p.dim();
  if (n < 3) throw std::invalid_argument("tensor_T needs dimension >= 3");
  const TensorValue& ric = p.ricci();
  const TensorValue& g = p.g();
  const TensorValue& df = p.df();
  const TensorValue up = raised_gradient(p);
  const double r = p.scalar();
  std::vector<double> ric_df(static_cast<std::size_t>(n), 0.0);  // R_is f^s
  for (int i = 0; i < n; ++i)
    for (int s = 0; s < n; ++s) ric_df[static_cast<std::size_t>(i)] += ric(i, s) * up(s);
  const double a = (n - 1.0) / (n - 2.0), b = 1.0 / (n - 2.0), c = r / (n - 2.0);
  TensorValue t(n, covariant(3));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        t(i, j, k) = a * (ric(i, k) * df(j) - ric(j, k) * df(i)) -
                     b * (ric_df[static_cast<std::size_t>(i)] * g(j, k) - ric_df[static_cast<std::size_t>(j)] * g(i, k)) -
                     c * (df(j) * g(i, k) - df(i) * g(j, k));
      }
  return t;
}

TensorValue lemma21_residual(const CPEPoint& p) {
  const int n = p.dim();
  const TensorValue c = cotton_tensor(p.geometry());
  const TensorValue w = weyl_tensor(value_of(p.geometry().riemann()), p.ricci(), p.scalar(), p.g());
  const TensorValue t = tensor_T(p);
  const TensorValue up = raised_gradient(p);
  const double f1 = p.f().value() + 1.0;
  TensorValue out(n, covariant(3));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double ws = 0.0;
        for (int s = 0; s < n; ++s) ws += w(i, j, k, s) * up(s);
        out(i, j, k) = f1 * c(i, j, k) - ws - t(i, j, k);
      }
  return out;
}

TContraction t_contract_gradient(const CPEPoint& p) {
  const int n = p.dim();
  const TensorValue t = tensor_T(p);
  const TensorValue up = raised_gradient(p);
  TContraction out{TensorValue(n, covariant(2)), TensorValue(n, covariant(2))};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double a = 0.0, b = 0.0;
      for (int k = 0; k < n; ++k) {
        a += t(i, j, k) * up(k);
        b += (p.ricci()(i, k) * p.df()(j) - p.ricci()(j, k) * p.df()(i)) * up(k);
      }
      out.contracted(i, j) = a;
      out.reduced(i, j) = b;
    }
  return out;
}

std::array<double, 3> eigensystem_combinations(const std::array<double, 4>& l, const std::array<double, 4>& d) {
  return {(l[0] - l[1]) * d[0] * d[1] + (l[2] - l[3]) * d[2] * d[3],
          (l[0] - l[2]) * d[0] * d[2] + (l[3] - l[1]) * d[3] * d[1],
          (l[0] - l[3]) * d[0] * d[3] + (l[1] - l[2]) * d[1] * d[2]};
}

RicciEigensystem ricci_eigensystem_residual(const CPEPoint& p) {
  require_regular(p);
  const Frame fr = orthonormal_frame(p.g(), p.geometry().point());
  const TensorValue ric = to_frame(p.ricci(), fr);
  Eigen::Matrix4d m;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) m(a, b) = 0.5 * (ric(a, b) + ric(b, a));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m);
  const Eigen::Vector4d df = frame_vector(fr, p.df());
  RicciEigensystem out;
  for (int k = 0; k < 4; ++k) {
    Eigen::Vector4d v = es.eigenvectors().col(k);
    for (int a = 0; a < 4; ++a) {
      if (std::abs(v[a]) > 1e-12) {
        if (v[a] < 0) v = -v;
        break;
      }
    }
    out.eigenvalues[static_cast<std::size_t>(k)] = es.eigenvalues()[k];
    out.basis.row(k) = v.transpose();
    out.gradient[static_cast<std::size_t>(k)] = v.dot(df);
  }
  out.residuals = eigensystem_combinations(out.eigenvalues, out.gradient);
  return out;
}

Frame adapted_frame(const CPEPoint& p) {
  require_regular(p);
  const TensorValue& g = p.g();
  const TensorValue up = raised_gradient(p);
  auto inner = [&g](const Eigen::Vector4d& u, const Eigen::Vector4d& v) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) s += u[i] * g(i, j) * v[j];
    return s;
  };
  Eigen::Matrix4d rows;
  std::vector<Eigen::Vector4d> ortho;
  Eigen::Vector4d n;
  for (int i = 0; i < 4; ++i) n[i] = up(i);
  ortho.push_back(n / std::sqrt(inner(n, n)));
  rows.row(0) = n.transpose();
  std::array<bool, 4> used{};
  for (int slot = 1; slot < 4; ++slot) {
    int best = -1;
    double best_ratio = -1.0;
    Eigen::Vector4d best_res;
    for (int c = 0; c < 4; ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      Eigen::Vector4d v = Eigen::Vector4d::Unit(c);
      const double len2 = inner(v, v);
      for (const auto& e : ortho) v -= inner(v, e) * e;
      const double ratio = inner(v, v) / len2;
      if (ratio > best_ratio) {
        best_ratio = ratio;
        best = c;
        best_res = v;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    ortho.push_back(best_res / std::sqrt(inner(best_res, best_res)));
    rows.row(slot) = Eigen::Vector4d::Unit(best).transpose();
  }
  return frame_from_vectors(g, rows, p.geometry().point());
}

LevelSetData level_set_geometry(const CPEPoint& p) {
  if (p.dim() != 4) throw std::invalid_argument("level_set_geometry: dimension 4 required");
  LevelSetData out;
  out.point = p.geometry().point();
  out.frame = adapted_frame(p);
  out.grad_norm = p.grad_norm();
  const TensorValue hf = to_frame(p.hess(), out.frame);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) out.h(a, b) = -hf(a + 1, b + 1) / out.grad_norm;
  out.mean_curvature = out.h.trace();
  out.mean_curvature_grad2 = (hf(0, 0) - p.laplacian()) / (out.grad_norm * out.grad_norm);
  out.umbilic_defect = (out.h - out.mean_curvature / 3.0 * Matrix3::Identity()).norm();
  return out;
}

TensorValue codazzi_residual(const CPEPoint& p) {
  if (p.dim() != 4) throw std::invalid_argument("codazzi_residual: dimension 4 required");
  const LocalGeometry& geom = p.geometry();
  require_order(geom.metric_order(), 3, "Codazzi residual");
  require_order(p.f().order(), 3, "Codazzi residual");
  const Frame fr = adapted_frame(p);
  const int n = 4;
  const TensorJet df = geom.gradient(p.f());
  const TensorJet& gi = geom.inverse_metric();
  std::vector<Jet> up(n);
  for (int i = 0; i < n; ++i) {
    Jet acc = Jet::zero(df(0).order());
    for (int j = 0; j < n; ++j) acc.add_product(gi(i, j), df(j));
    up[static_cast<std::size_t>(i)] = acc;
  }
  Jet norm2 = Jet::zero(df(0).order());
  for (int i = 0; i < n; ++i) norm2.add_product(df(i), up[static_cast<std::size_t>(i)]);
  const Jet inv_norm = reciprocal(sqrt(norm2));
  // Projection P_i^j = delta_i^j - N_i N^j onto the level-set tangent space.
  std::vector<Jet> proj(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet v = -(df(i) * up[static_cast<std::size_t>(j)]) * (inv_norm * inv_norm);
      if (i == j) v += 1.0;
      proj[static_cast<std::size_t>(i * n + j)] = v;
    }
  const TensorJet hess = geom.hessian(p.f());
  TensorJet half(n, covariant(2));  // P_i^k Hess_kj
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet acc = Jet::zero(hess(0, 0).order());
      for (int k = 0; k < n; ++k) acc.add_product(proj[static_cast<std::size_t>(i * n + k)], hess(k, j));
      half(i, j) = acc;
    }
  TensorJet h(n, covariant(2));  // -P_i^k P_j^l Hess_kl / |grad f|
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Jet acc = Jet::zero(hess(0, 0).order());
      for (int l = 0; l < n; ++l) acc.add_product(proj[static_cast<std::size_t>(j * n + l)], half(i, l));
      h(i, j) = -(acc * inv_norm);
      h(j, i) = h(i, j);
    }
  const TensorValue dh = to_frame(value_of(geom.covariant_derivative(h)), fr);
  const TensorValue rf = to_frame(value_of(geom.riemann()), fr);
  TensorValue out(3, covariant(3));
  for (int a = 1; a < 4; ++a)
    for (int b = 1; b < 4; ++b)
      for (int c = 1; c < 4; ++c) out(a - 1, b - 1, c - 1) = rf(a, b, c, 0) - (dh(b, a, c) - dh(a, b, c));
  return out;
}

GradientNormConstancy gradient_norm_constancy(const CPEInstance& inst, const std::vector<Point>& points, JetMode mode) {
  if (points.empty()) throw std::invalid_argument("gradient_norm_constancy: no points");
  const double c = inst.potential()(points.front());
  for (const Point& x : points) {
    if (std::abs(inst.potential()(x) - c) > 1e-8) {
      throw std::invalid_argument("gradient_norm_constancy: points do not lie on a common level set");
    }
  }
  GradientNormConstancy out;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Point& x : points) {
    const CPEPoint p(inst, x, mode, 3);
    const int n = p.dim();
    const double gn = p.grad_norm();
    lo = std::min(lo, gn * gn);
    hi = std::max(hi, gn * gn);
    const LocalGeometry& geom = p.geometry();
    const TensorJet df = geom.gradient(p.f());
    Jet q = Jet::zero(df(0).order());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) q.add_product(geom.inverse_metric()(i, j), df(i) * df(j));
    const Frame fr = adapted_frame(p);
    const TensorValue up = raised_gradient(p);
    const double f = p.f().value();
    const double r = p.scalar();
    for (int a = 1; a < 4; ++a) {
      double dq = 0.0, hess_term = 0.0, ric0 = 0.0, gdot = 0.0;
      for (int i = 0; i < n; ++i) {
        dq += fr.vectors(a, i) * q.derivative(i).value();
        for (int j = 0; j < n; ++j) {
          hess_term += p.hess()(i, j) * up(i) * fr.vectors(a, j);
          ric0 += (p.ricci()(i, j) - r / n * p.g()(i, j)) * up(i) * fr.vectors(a, j);
          gdot += p.g()(i, j) * up(i) * fr.vectors(a, j);
        }
      }
      const double rhs = (f + 1.0) * ric0 - r * f / (n * (n - 1.0)) * gdot;
      out.tangential_max = std::max(out.tangential_max, std::abs(dq));
      out.cpe_rhs_max = std::max(out.cpe_rhs_max, std::abs(rhs));
      out.factor_residual_max = std::max(out.factor_residual_max, std::abs(dq - 2.0 * hess_term));
    }
  }
  out.deviation = hi - lo;
  return out;
}

CottonChain delta_wplus_cotton_chain(const CPEPoint& p) {
  if (p.dim() != 4) throw std::invalid_argument("delta_wplus_cotton_chain: dimension 4 required");
  const LocalGeometry& geom = p.geometry();
  require_order(geom.metric_order(), 3, "self-dual Cotton chain");
  const Frame fr = orthonormal_frame(p.g(), geom.point());
  const TensorValue dwp = to_frame(value_of(divergence_jet(geom, self_dual_part(geom, weyl_jet(geom), 1))), fr);
  const TensorValue c = to_frame(cotton_tensor(geom), fr);
  const TensorValue t = to_frame(tensor_T(p), fr);
  const Eigen::Vector4d df = frame_vector(fr, p.df());
  CottonChain out{TensorValue(4, covariant(3)), TensorValue(4, covariant(2))};
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) {
        double rhs = c(k, l, j);
        if (k != l) {
          const auto [kb, lb] = dual_pair(k, l);
          rhs += c(kb, lb, j);
        }
        out.residual1(j, k, l) = 4.0 * dwp(j, k, l) - rhs;
      }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) {
        double tt = t(i, j, k);
        if (i != j) {
          const auto [ib, jb] = dual_pair(i, j);
          tt += t(ib, jb, k);
        }
        s += tt * df[k];
      }
      out.residual2(i, j) = s;
    }
  return out;
}

}  // namespace cpecheck
