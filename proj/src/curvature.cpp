#include "cpecheck/curvature.hpp"

#include <Eigen/Dense>
#include <string>

#include "cpecheck/errors.hpp"

namespace cpecheck {

int jet_order(const TensorJet& t) {
  int o = kMaxJetOrder;
  for (const Jet& e : t.entries()) o = std::min(o, e.order());
  return o;
}

void require_order(int available, int needed, const char* what) {
  if (available < needed) {
    throw OrderError(std::string(what) + " needs jets of order " + std::to_string(needed) + ", only " +
                     std::to_string(available) + " available");
  }
}

namespace {

Eigen::MatrixXd value_matrix(const TensorJet& g) {
  const int n = g.dim();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = g(i, j).value();
  }
  return m;
}

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw DegenerateMetricError("metric is not positive definite at the point");
  const Eigen::VectorXd d = m.diagonal();
  const double scale = d.maxCoeff();
  const double pivot = llt.matrixL().toDenseMatrix().diagonal().minCoeff();
  if (!(pivot * pivot > 1e-14 * scale)) throw DegenerateMetricError("metric is numerically singular at the point");
  return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

// Neumann series around g(x)^{-1}: the perturbation has no constant term, so
// its k-th power starts at degree k and the series terminates at the jet order.
TensorJet inverse_jet(const TensorJet& g, int order) {
  const int n = g.dim();
  const Eigen::MatrixXd inv0 = checked_inverse(value_matrix(g));
  std::vector<Jet> d(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Jet e = g(i, j);
      e.set_coefficient(0, 0.0);
      d[static_cast<std::size_t>(i * n + j)] = e;
    }
  }
  TensorJet term(n, contravariant(2));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) term(i, j) = Jet::constant(inv0(i, j)).truncated(order);
  }
  TensorJet sum = term;
  for (int k = 1; k <= order; ++k) {
    // term <- -inv0 * D * term
    TensorJet dt(n, contravariant(2));
    for (int p = 0; p < n; ++p) {
      for (int j = 0; j < n; ++j) {
        Jet acc = Jet::zero(order);
        for (int q = 0; q < n; ++q) acc.add_product(d[static_cast<std::size_t>(p * n + q)], term(q, j));
        dt(p, j) = acc;
      }
    }
    TensorJet next(n, contravariant(2));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Jet acc = Jet::zero(order);
        for (int p = 0; p < n; ++p) acc -= inv0(i, p) * dt(p, j);
        next(i, j) = acc;
      }
    }
    term = next;
    sum += term;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      sum(i, j) = 0.5 * (sum(i, j) + sum(j, i));
      sum(j, i) = sum(i, j);
    }
  }
  return sum;
}

Jet determinant(const TensorJet& m, std::vector<int>& rows, int col) {
  const int n = m.dim();
  if (col == n) return Jet::constant(1.0);
  Jet acc{};
  int sign = 1;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const int r = rows[k];
    std::vector<int> rest;
    for (std::size_t q = 0; q < rows.size(); ++q) {
      if (q != k) rest.push_back(rows[q]);
    }
    const Jet minor = determinant(m, rest, col + 1);
    if (sign > 0) {
      fma_into(acc, m(r, col), minor);
    } else {
      acc -= m(r, col) * minor;
    }
    sign = -sign;
  }
  return acc;
}

}  // namespace

LocalGeometry::LocalGeometry(const MetricField& g, const Point& x, JetMode mode, int order)
    : dim_(g.dim()), point_(x), mode_(mode), order_(order) {
  if (order < 2) throw std::invalid_argument("curvature needs a metric jet of order >= 2");
  g_ = metric_jet(g, x, order, mode);
  build();
}

LocalGeometry::LocalGeometry(TensorJet metric_jet, const Point& x, JetMode mode)
    : dim_(metric_jet.dim()), point_(x), mode_(mode), g_(std::move(metric_jet)) {
  order_ = jet_order(g_);
  if (order_ < 2) throw std::invalid_argument("curvature needs a metric jet of order >= 2");
  build();
}

void LocalGeometry::build() {
  const int n = dim_;
  g_inv_ = inverse_jet(g_, order_);

  // dg(d, b, c) = d_d g_bc
  TensorJet dg(n, covariant(3));
  for (int d = 0; d < n; ++d) {
    for (int b = 0; b < n; ++b) {
      for (int c = b; c < n; ++c) {
        dg(d, b, c) = g_(b, c).derivative(d);
        dg(d, c, b) = dg(d, b, c);
      }
    }
  }
  gamma_ = TensorJet(n, Variance{Slot::contravariant, Slot::covariant, Slot::covariant});
  for (int b = 0; b < n; ++b) {
    for (int c = b; c < n; ++c) {
      std::vector<Jet> lowered(static_cast<std::size_t>(n));
      for (int d = 0; d < n; ++d) {
        lowered[static_cast<std::size_t>(d)] = 0.5 * (dg(b, d, c) + dg(c, d, b) - dg(d, b, c));
      }
      for (int a = 0; a < n; ++a) {
        Jet acc = Jet::zero(order_ - 1);
        for (int d = 0; d < n; ++d) acc.add_product(g_inv_(a, d), lowered[static_cast<std::size_t>(d)]);
        gamma_(a, b, c) = acc;
        gamma_(a, c, b) = acc;
      }
    }
  }

  // R^a_bcd, antisymmetric in (c, d) by construction.
  TensorJet up(n, Variance{Slot::contravariant, Slot::covariant, Slot::covariant, Slot::covariant});
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        for (int d = c + 1; d < n; ++d) {
          Jet r = gamma_(a, d, b).derivative(c) - gamma_(a, c, b).derivative(d);
          for (int e = 0; e < n; ++e) {
            r.add_product(gamma_(a, c, e), gamma_(e, d, b));
            r.add_product(gamma_(a, d, e), gamma_(e, c, b), -1.0);
          }
          up(a, b, c, d) = r;
          up(a, b, d, c) = -r;
        }
        up(a, b, c, c) = Jet::zero(order_ - 2);
      }
    }
  }
  riemann_ = lower(up, 0, g_);
  // Ric_bd = R^c_bcd, averaged with its transpose (symmetric up to rounding).
  ricci_ = TensorJet(n, covariant(2));
  for (int b = 0; b < n; ++b) {
    for (int d = 0; d < n; ++d) {
      Jet acc = Jet::zero(order_ - 2);
      for (int c = 0; c < n; ++c) acc += up(c, b, c, d);
      ricci_(b, d) = acc;
    }
  }
  for (int b = 0; b < n; ++b) {
    for (int d = b + 1; d < n; ++d) {
      const Jet avg = 0.5 * (ricci_(b, d) + ricci_(d, b));
      ricci_(b, d) = avg;
      ricci_(d, b) = avg;
    }
  }
  scalar_ = Jet::zero(order_ - 2);
  for (int b = 0; b < n; ++b) {
    for (int d = 0; d < n; ++d) scalar_.add_product(g_inv_(b, d), ricci_(b, d));
  }
}

Jet LocalGeometry::volume_density() const {
  std::vector<int> rows(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) rows[static_cast<std::size_t>(i)] = i;
  return sqrt(determinant(g_, rows, 0));
}

TensorJet LocalGeometry::covariant_derivative(const TensorJet& t) const {
  if (t.dim() != dim_) throw std::invalid_argument("covariant_derivative: dimension mismatch");
  const int in_order = jet_order(t);
  require_order(in_order, 1, "covariant derivative");
  const int n = dim_;
  const int r = t.rank();
  Variance v{Slot::covariant};
  v.insert(v.end(), t.variance().begin(), t.variance().end());
  TensorJet out(n, std::move(v));

  std::vector<std::size_t> stride(static_cast<std::size_t>(r));
  {
    std::size_t s = 1;
    for (int k = r - 1; k >= 0; --k) {
      stride[static_cast<std::size_t>(k)] = s;
      s *= static_cast<std::size_t>(n);
    }
  }
  const std::size_t block = t.size();
  std::vector<int> idx(static_cast<std::size_t>(r));
  for (int e = 0; e < n; ++e) {
    for (std::size_t o = 0; o < block; ++o) {
      if (r > 0) t.unflatten(o, idx);
      Jet acc = t.entries()[o].derivative(e);
      for (int s = 0; s < r; ++s) {
        const int a = idx[static_cast<std::size_t>(s)];
        const std::size_t base = o - static_cast<std::size_t>(a) * stride[static_cast<std::size_t>(s)];
        for (int m = 0; m < n; ++m) {
          const Jet& tm = t.entries()[base + static_cast<std::size_t>(m) * stride[static_cast<std::size_t>(s)]];
          if (t.slot(s) == Slot::covariant) {
            acc.add_product(gamma_(m, e, a), tm, -1.0);
          } else {
            acc.add_product(gamma_(a, e, m), tm);
          }
        }
      }
      out.entries()[static_cast<std::size_t>(e) * block + o] = acc;
    }
  }
  return out;
}

TensorJet LocalGeometry::gradient(const Jet& f) const {
  require_order(f.order(), 1, "gradient");
  TensorJet out(dim_, covariant(1));
  for (int i = 0; i < dim_; ++i) out(i) = f.derivative(i);
  return out;
}

TensorJet LocalGeometry::hessian(const Jet& f) const {
  require_order(f.order(), 2, "hessian");
  const int n = dim_;
  std::vector<Jet> df(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) df[static_cast<std::size_t>(k)] = f.derivative(k);
  TensorJet out(n, covariant(2));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Jet h = df[static_cast<std::size_t>(i)].derivative(j);
      for (int k = 0; k < n; ++k) h.add_product(gamma_(k, i, j), df[static_cast<std::size_t>(k)], -1.0);
      out(i, j) = h;
      out(j, i) = h;
    }
  }
  return out;
}

Jet LocalGeometry::laplacian(const Jet& f) const {
  const TensorJet h = hessian(f);
  Jet acc = Jet::zero(f.order() - 2);
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) acc.add_product(g_inv_(i, j), h(i, j));
  }
  return acc;
}

CurvaturePoint LocalGeometry::at_point() const {
  CurvaturePoint cp;
  cp.point = point_;
  cp.g = value_of(g_);
  cp.g_inv = value_of(g_inv_);
  cp.christoffel = value_of(gamma_);
  cp.riemann = value_of(riemann_);
  cp.ricci = value_of(ricci_);
  cp.scalar = scalar_.value();
  return cp;
}

CurvaturePoint curvature_at(const MetricField& g, const Point& x, JetMode mode) {
  return LocalGeometry(g, x, mode, 2).at_point();
}

HessianLaplacian hessian_laplacian(const ScalarField& f, const MetricField& g, const Point& x, JetMode mode) {
  const LocalGeometry geom(g, x, mode, 2);
  const Jet fj = scalar_jet(f, x, 2, mode);
  HessianLaplacian out;
  out.hessian = value_of(geom.hessian(fj));
  out.laplacian = geom.laplacian(fj).value();
  return out;
}

double scalar_curvature_fast(const MetricField& g, const Point& x, double* volume_density) {
  const int n = g.dim();
  const TensorJet gj = metric_jet(g, x, 2, JetMode::taylor);
  constexpr int N = 4;
  double G[N][N]{}, dG[N][N][N]{}, ddG[N][N][N][N]{};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Jet& e = gj(i, j);
      G[i][j] = e.value();
      for (int k = 0; k < n; ++k) {
        MultiIndex a{};
        a[k] = 1;
        dG[k][i][j] = e.partial(a);
        for (int l = 0; l < n; ++l) {
          MultiIndex b = a;
          b[l] += 1;
          ddG[k][l][i][j] = e.partial(b);
        }
      }
    }
  }
  Eigen::MatrixXd gm(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) gm(i, j) = G[i][j];
  }
  const Eigen::MatrixXd gi = checked_inverse(gm);
  if (volume_density != nullptr) *volume_density = std::sqrt(gm.determinant());

  // d_e g^{ad} = -g^{ap} d_e g_pq g^{qd}
  double dGi[N][N][N]{};
  for (int e = 0; e < n; ++e) {
    for (int a = 0; a < n; ++a) {
      for (int d = 0; d < n; ++d) {
        double s = 0.0;
        for (int p = 0; p < n; ++p) {
          for (int q = 0; q < n; ++q) s -= gi(a, p) * dG[e][p][q] * gi(q, d);
        }
        dGi[e][a][d] = s;
      }
    }
  }
  double gam[N][N][N]{}, dgam[N][N][N][N]{};  // gam[a][b][c], dgam[e][a][b][c]
  for (int b = 0; b < n; ++b) {
    for (int c = 0; c < n; ++c) {
      double low[N]{}, dlow[N][N]{};
      for (int d = 0; d < n; ++d) {
        low[d] = 0.5 * (dG[b][d][c] + dG[c][d][b] - dG[d][b][c]);
        for (int e = 0; e < n; ++e) dlow[e][d] = 0.5 * (ddG[e][b][d][c] + ddG[e][c][d][b] - ddG[e][d][b][c]);
      }
      for (int a = 0; a < n; ++a) {
        double s = 0.0;
        for (int d = 0; d < n; ++d) s += gi(a, d) * low[d];
        gam[a][b][c] = s;
        for (int e = 0; e < n; ++e) {
          double t = 0.0;
          for (int d = 0; d < n; ++d) t += dGi[e][a][d] * low[d] + gi(a, d) * dlow[e][d];
          dgam[e][a][b][c] = t;
        }
      }
    }
  }
  double r = 0.0;
  for (int b = 0; b < n; ++b) {
    for (int d = 0; d < n; ++d) {
      double ric = 0.0;
      for (int a = 0; a < n; ++a) {
        ric += dgam[a][a][d][b] - dgam[d][a][a][b];
        for (int e = 0; e < n; ++e) ric += gam[a][a][e] * gam[e][d][b] - gam[a][d][e] * gam[e][a][b];
      }
      r += gi(b, d) * ric;
    }
  }
  return r;
}

}  // namespace cpecheck
