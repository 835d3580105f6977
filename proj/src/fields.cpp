#include "cpecheck/fields.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "cpecheck/errors.hpp"
#include "cpecheck/finite_difference.hpp"

namespace cpecheck {

std::string to_string(JetMode m) { return m == JetMode::taylor ? "taylor" : "fd"; }

JetMode jet_mode_from_string(const std::string& s) {
  if (s == "taylor") return JetMode::taylor;
  if (s == "fd") return JetMode::fd;
  throw std::invalid_argument("unknown jet mode '" + s + "' (expected taylor or fd)");
}

double jet_tolerance(JetMode mode, int derivative_order) {
  if (mode == JetMode::taylor) return 1e-10;
  if (derivative_order <= 2) return 1e-7;
  if (derivative_order == 3) return 1e-5;
  return 1e-3;
}

Box Box::whole() { return Box{}; }

Box Box::cube(double lo, double hi) {
  Box b;
  b.lo.fill(lo);
  b.hi.fill(hi);
  return b;
}

bool Box::contains(const Point& x, int dim) const {
  for (int v = 0; v < dim; ++v) {
    if (!(x[v] > lo[v] && x[v] < hi[v])) return false;
  }
  return true;
}

Box Box::intersect(const Box& o) const {
  Box b;
  for (int v = 0; v < 4; ++v) {
    b.lo[v] = std::max(lo[v], o.lo[v]);
    b.hi[v] = std::min(hi[v], o.hi[v]);
  }
  return b;
}

namespace {

std::string describe(const Point& x) {
  std::ostringstream os;
  os.precision(17);
  os << '(' << x[0] << ", " << x[1] << ", " << x[2] << ", " << x[3] << ')';
  return os.str();
}

void require_inside(const Box& domain, const Point& x, int dim) {
  if (!domain.contains(x, dim)) throw DomainError("point " + describe(x) + " is outside the field domain");
}

void check_order(int order) {
  if (order < 0 || order > kMaxJetOrder) throw std::invalid_argument("jet order must lie in [0, 4]");
}

}  // namespace

double ScalarField::operator()(const Point& x) const {
  require_inside(domain_, x, 4);
  return expr_(x);
}

MetricField::MetricField(int dim, std::vector<Expr> components, Box domain)
    : dim_(dim), components_(std::move(components)), domain_(domain) {
  if (dim_ < 2 || dim_ > 4) throw std::invalid_argument("metric dimension must lie in [2, 4]");
  if (components_.size() != static_cast<std::size_t>(dim_ * dim_)) {
    throw std::invalid_argument("metric needs dim*dim components");
  }
  for (int i = 0; i < dim_; ++i) {
    for (int j = i + 1; j < dim_; ++j) {
      if (component(i, j).node() != component(j, i).node()) {
        throw std::invalid_argument("metric components must be symmetric (use from_upper)");
      }
    }
  }
}

MetricField MetricField::from_upper(int dim, const std::vector<Expr>& upper, Box domain) {
  if (upper.size() != static_cast<std::size_t>(dim * (dim + 1) / 2)) {
    throw std::invalid_argument("metric needs dim*(dim+1)/2 upper-triangle components");
  }
  std::vector<Expr> full(static_cast<std::size_t>(dim * dim));
  std::size_t k = 0;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      full[static_cast<std::size_t>(i * dim + j)] = upper[k];
      full[static_cast<std::size_t>(j * dim + i)] = upper[k];
      ++k;
    }
  }
  return MetricField(dim, std::move(full), domain);
}

MetricField MetricField::conformally_flat(int dim, const Expr& phi, Box domain) {
  const Expr factor = exp(2.0 * phi);
  std::vector<Expr> upper;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) upper.push_back(i == j ? factor : Expr(0.0));
  }
  return from_upper(dim, upper, domain);
}

TensorValue MetricField::at(const Point& x) const {
  require_inside(domain_, x, dim_);
  Evaluator<double> ev(x);
  TensorValue g(dim_, covariant(2));
  for (int i = 0; i < dim_; ++i) {
    for (int j = i; j < dim_; ++j) {
      g(i, j) = ev(component(i, j));
      g(j, i) = g(i, j);
    }
  }
  return g;
}

bool MetricField::positive_definite_at(const std::vector<Point>& points) const {
  for (const Point& p : points) {
    const TensorValue g = at(p);
    Eigen::MatrixXd m(dim_, dim_);
    for (int i = 0; i < dim_; ++i) {
      for (int j = 0; j < dim_; ++j) m(i, j) = g(i, j);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) return false;
  }
  return true;
}

Jet scalar_jet(const ScalarField& f, const Point& x, int order, JetMode mode) {
  check_order(order);
  require_inside(f.domain(), x, 4);
  if (mode == JetMode::taylor) return f.expr().jet(x, order);
  const Expr& e = f.expr();
  return fd_jet([&e](const Point& p) { return e(p); }, x, order);
}

TensorJet metric_jet(const MetricField& g, const Point& x, int order, JetMode mode) {
  check_order(order);
  require_inside(g.domain(), x, g.dim());
  const int n = g.dim();
  TensorJet out(n, covariant(2));
  if (mode == JetMode::taylor) {
    Evaluator<Jet> ev(x, order);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        out(i, j) = ev(g.component(i, j));
        out(j, i) = out(i, j);
      }
    }
    return out;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const Expr& e = g.component(i, j);
      if (e.is_constant()) {
        out(i, j) = Jet::constant(e.constant_value()).truncated(order);
      } else {
        out(i, j) = fd_jet([&e](const Point& p) { return e(p); }, x, order);
      }
      out(j, i) = out(i, j);
    }
  }
  return out;
}

}  // namespace cpecheck
