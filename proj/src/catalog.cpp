#include "cpecheck/catalog.hpp"

#include <boost/math/special_functions/legendre.hpp>
#include <boost/random/sobol.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "cpecheck/curvature.hpp"
#include "cpecheck/errors.hpp"

namespace cpecheck {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kSubSeedStride = 0x9E3779B97F4A7C15ULL;

Expr x(int i) { return Expr::var(i); }

Expr sum_squares(int from, int to) {
  Expr s = 0.0;
  for (int i = from; i < to; ++i) s = s + x(i) * x(i);
  return s;
}

double param(const std::map<std::string, double>& p, const std::string& name, double fallback) {
  const auto it = p.find(name);
  return it == p.end() ? fallback : it->second;
}

void check_known(const std::string& id, const std::map<std::string, double>& p,
                 std::initializer_list<const char*> allowed) {
  for (const auto& [name, value] : p) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || name == a;
    if (!ok) throw std::invalid_argument("fixture " + id + " has no parameter '" + name + "'");
    if (!std::isfinite(value)) throw std::invalid_argument("fixture " + id + ": parameter '" + name + "' is not finite");
  }
}

double positive(const std::string& id, const std::string& name, double v) {
  if (!(v > 0.0)) throw std::invalid_argument("fixture " + id + ": parameter '" + name + "' must be positive");
  return v;
}

std::vector<Expr> diagonal_upper(const std::array<Expr, 4>& d) {
  std::vector<Expr> upper;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) upper.push_back(i == j ? d[static_cast<std::size_t>(i)] : Expr(0.0));
  return upper;
}

Box scaled_cube(const std::array<double, 4>& half) {
  Box b;
  for (int v = 0; v < 4; ++v) {
    b.lo[v] = -half[v];
    b.hi[v] = half[v];
  }
  return b;
}

FixtureSpec s4_round(const std::map<std::string, double>& p) {
  check_known("s4_round", p, {"r"});
  const double r = positive("s4_round", "r", param(p, "r", 1.0));
  const Expr r2 = sum_squares(0, 4);
  const Expr den = r * r + r2;
  const Expr c = 4.0 * std::pow(r, 4) / (den * den);
  FixtureSpec f;
  f.id = "s4_round";
  f.params = {{"r", r}};
  f.metric = MetricField::from_upper(4, diagonal_upper({c, c, c, c}));
  f.potentials.emplace_back("zero", ScalarField(Expr(0.0)));
  for (int i = 0; i < 4; ++i) {
    f.potentials.emplace_back("height" + std::to_string(i + 1), ScalarField(2.0 * r * x(i) / den));
  }
  f.potentials.emplace_back("height5", ScalarField((r * r - r2) / den));
  const double k = 1.0 / (r * r);
  f.facts.scalar_curvature = 12.0 * k;
  f.facts.einstein = true;
  f.facts.weyl_zero = true;
  f.facts.w_minus_zero = true;
  f.facts.cotton_zero = true;
  f.facts.w_plus_spectrum = std::array<double, 3>{0.0, 0.0, 0.0};
  f.facts.w_minus_spectrum = std::array<double, 3>{0.0, 0.0, 0.0};
  f.facts.ricci_eigenvalues = std::array<double, 4>{3 * k, 3 * k, 3 * k, 3 * k};
  f.facts.volume = 8.0 * kPi * kPi / 3.0 * std::pow(r, 4);
  f.facts.total_scalar_curvature = 32.0 * kPi * kPi * r * r;
  f.sample_box = scaled_cube({r, r, r, r});
  f.quadrature.whole_chart = true;
  f.quadrature.scale = {r, r, r, r};
  f.quadrature.radius = 1e3 * r;
  return f;
}

FixtureSpec flat_torus(const std::map<std::string, double>& p) {
  check_known("flat_torus", p, {});
  FixtureSpec f;
  f.id = "flat_torus";
  const Box unit = Box::cube(0.0, 1.0);
  f.metric = MetricField::from_upper(4, diagonal_upper({1.0, 1.0, 1.0, 1.0}), unit);
  f.potentials.emplace_back("zero", ScalarField(Expr(0.0), unit));
  f.potentials.emplace_back("x1", ScalarField(x(0), unit));
  f.potentials.emplace_back("constant", ScalarField(Expr(1.0), unit));
  f.facts.scalar_curvature = 0.0;
  f.facts.einstein = true;
  f.facts.weyl_zero = true;
  f.facts.w_minus_zero = true;
  f.facts.cotton_zero = true;
  f.facts.w_plus_spectrum = std::array<double, 3>{0.0, 0.0, 0.0};
  f.facts.w_minus_spectrum = std::array<double, 3>{0.0, 0.0, 0.0};
  f.facts.ricci_eigenvalues = std::array<double, 4>{0.0, 0.0, 0.0, 0.0};
  f.facts.volume = 1.0;
  f.facts.total_scalar_curvature = 0.0;
  f.sample_box = Box::cube(0.1, 0.9);
  f.quadrature.box = unit;
  return f;
}

// Fubini-Study in the affine chart z1 = x1 + i x2, z2 = x3 + i x4, from the
// Kahler potential log(1 + |z|^2): h_jk = ((1+|z|^2) d_jk - conj(z_j) z_k) / (1+|z|^2)^2,
// g(dx_j, dx_k) = g(dy_j, dy_k) = Re h_jk, g(dx_j, dy_k) = Im h_jk.
FixtureSpec cp2_fubini_study(const std::map<std::string, double>& p) {
  check_known("cp2_fubini_study", p, {"scale"});
  const double s = positive("cp2_fubini_study", "scale", param(p, "scale", 1.0));
  const Expr rho = 1.0 + sum_squares(0, 4);
  const Expr rho2 = rho * rho;
  const std::array<Expr, 2> xs{x(0), x(2)};
  const std::array<Expr, 2> ys{x(1), x(3)};
  std::vector<Expr> full(16);
  auto set = [&full](int i, int j, const Expr& e) {
    full[static_cast<std::size_t>(i * 4 + j)] = e;
    full[static_cast<std::size_t>(j * 4 + i)] = e;
  };
  for (int j = 0; j < 2; ++j) {
    for (int k = j; k < 2; ++k) {
      const Expr re = xs[j] * xs[k] + ys[j] * ys[k];
      const Expr a = s * ((j == k ? rho : Expr(0.0)) - re) / rho2;
      set(2 * j, 2 * k, a);
      set(2 * j + 1, 2 * k + 1, a);
    }
    for (int k = 0; k < 2; ++k) {
      const Expr im = xs[j] * ys[k] - ys[j] * xs[k];
      const Expr b = j == k ? Expr(0.0) : s * (0.0 - im) / rho2;
      set(2 * j, 2 * k + 1, b);
    }
  }
  FixtureSpec f;
  f.id = "cp2_fubini_study";
  f.params = {{"scale", s}};
  f.metric = MetricField(4, full);
  f.potentials.emplace_back("zero", ScalarField(Expr(0.0)));
  f.potentials.emplace_back("x1", ScalarField(x(0)));
  const double r = 24.0 / s;
  f.facts.scalar_curvature = r;
  f.facts.einstein = true;
  f.facts.w_minus_zero = true;
  f.facts.cotton_zero = true;
  f.facts.w_plus_spectrum = std::array<double, 3>{-r / 12.0, -r / 12.0, r / 6.0};
  f.facts.w_minus_spectrum = std::array<double, 3>{0.0, 0.0, 0.0};
  f.facts.ricci_eigenvalues = std::array<double, 4>{r / 4, r / 4, r / 4, r / 4};
  f.facts.volume = kPi * kPi / 2.0 * s * s;
  f.facts.total_scalar_curvature = r * kPi * kPi / 2.0 * s * s;
  f.sample_box = Box::cube(-1.0, 1.0);
  f.quadrature.whole_chart = true;
  f.quadrature.radius = 1e4;
  return f;
}

FixtureSpec s2xs2(const std::map<std::string, double>& p) {
  check_known("s2xs2", p, {"a", "b"});
  const double a = positive("s2xs2", "a", param(p, "a", 1.0));
  const double b = positive("s2xs2", "b", param(p, "b", 1.0));
  const Expr da = a * a + sum_squares(0, 2);
  const Expr db = b * b + sum_squares(2, 4);
  const Expr ca = 4.0 * std::pow(a, 4) / (da * da);
  const Expr cb = 4.0 * std::pow(b, 4) / (db * db);
  FixtureSpec f;
  f.id = "s2xs2";
  f.params = {{"a", a}, {"b", b}};
  f.metric = MetricField::from_upper(4, diagonal_upper({ca, ca, cb, cb}));
  f.potentials.emplace_back("zero", ScalarField(Expr(0.0)));
  f.potentials.emplace_back("x1", ScalarField(x(0)));
  const double r = 2.0 / (a * a) + 2.0 / (b * b);
  f.facts.scalar_curvature = r;
  f.facts.einstein = a == b;
  f.facts.cotton_zero = true;
  // Both orientations are Kahler, so W+ and W- have the Kahler spectrum.
  f.facts.w_plus_spectrum = std::array<double, 3>{-r / 12.0, -r / 12.0, r / 6.0};
  f.facts.w_minus_spectrum = f.facts.w_plus_spectrum;
  f.facts.w_minus_zero = false;
  std::array<double, 4> ev{1.0 / (a * a), 1.0 / (a * a), 1.0 / (b * b), 1.0 / (b * b)};
  std::sort(ev.begin(), ev.end());
  f.facts.ricci_eigenvalues = ev;
  f.facts.volume = 16.0 * kPi * kPi * a * a * b * b;
  f.facts.total_scalar_curvature = r * *f.facts.volume;
  f.sample_box = scaled_cube({a, a, b, b});
  f.quadrature.whole_chart = true;
  f.quadrature.scale = {a, a, b, b};
  f.quadrature.radius = 1e4 * std::max(a, b);
  return f;
}

FixtureSpec conformal_flat(const std::map<std::string, double>& p) {
  check_known("conformal_flat", p, {"seed", "amplitude"});
  const double seed = param(p, "seed", 1.0);
  const double amp = param(p, "amplitude", 0.3);
  if (seed < 0 || seed != std::floor(seed)) throw std::invalid_argument("fixture conformal_flat: seed must be a non-negative integer");
  if (!(amp >= 0.0 && amp <= 1.0)) throw std::invalid_argument("fixture conformal_flat: amplitude must lie in [0, 1]");
  const Box domain = Box::cube(-1.0, 1.0);
  const Expr phi = random_polynomial(static_cast<std::uint64_t>(seed), amp);
  FixtureSpec f;
  f.id = "conformal_flat";
  f.params = {{"seed", seed}, {"amplitude", amp}};
  f.metric = MetricField::conformally_flat(4, phi, domain);
  f.potentials.emplace_back("zero", ScalarField(Expr(0.0), domain));
  f.potentials.emplace_back("x1", ScalarField(x(0), domain));
  f.potentials.emplace_back("random", ScalarField(random_potential(static_cast<std::uint64_t>(seed)).expr(), domain));
  f.facts.weyl_zero = true;
  f.facts.w_minus_zero = true;
  f.facts.cotton_zero = true;
  f.facts.w_plus_spectrum = std::array<double, 3>{0.0, 0.0, 0.0};
  f.facts.w_minus_spectrum = std::array<double, 3>{0.0, 0.0, 0.0};
  f.sample_box = Box::cube(-0.5, 0.5);
  f.quadrature.box = domain;
  return f;
}

}  // namespace

const ScalarField& FixtureSpec::potential(const std::string& name) const {
  for (const auto& [n, f] : potentials)
    if (n == name) return f;
  throw std::invalid_argument("fixture " + id + " has no potential '" + name + "'");
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

Expr random_polynomial(std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  auto coef = [&] { return amplitude * (2.0 * unit_uniform(rng()) - 1.0); };
  Expr p = coef();
  for (int i = 0; i < 4; ++i) {
    p = p + coef() * x(i);
    for (int j = i; j < 4; ++j) {
      p = p + coef() * x(i) * x(j);
      for (int k = j; k < 4; ++k) p = p + coef() * x(i) * x(j) * x(k);
    }
  }
  return p;
}

ScalarField random_potential(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5DEECE66DULL);
  Expr f = random_polynomial(rng(), 0.15);
  for (int i = 0; i < 4; ++i) {
    const double mag = 0.5 + 0.5 * unit_uniform(rng());
    const double sign = unit_uniform(rng()) < 0.5 ? -1.0 : 1.0;
    f = f + sign * mag * x(i);
  }
  return ScalarField(f);
}

std::vector<Point> sample_points(const Box& box, int count, std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("sample count must be non-negative");
  for (int v = 0; v < 4; ++v) {
    if (!std::isfinite(box.lo[v]) || !std::isfinite(box.hi[v]) || !(box.lo[v] < box.hi[v])) {
      throw std::invalid_argument("sampling box must be finite and non-empty");
    }
  }
  std::mt19937_64 rng(seed);
  std::array<double, 4> shift{};
  for (double& s : shift) s = unit_uniform(rng());
  boost::random::sobol qrng(4);
  qrng.discard(4);  // skip the origin
  const double span = static_cast<double>(qrng.max() - qrng.min()) + 1.0;
  std::vector<Point> pts(static_cast<std::size_t>(count));
  for (auto& p : pts) {
    for (int v = 0; v < 4; ++v) {
      double u = static_cast<double>(qrng() - qrng.min()) / span + shift[v];
      u -= std::floor(u);
      // keep strictly inside the open box
      u = std::clamp(u, 1e-9, 1.0 - 1e-9);
      p[v] = box.lo[v] + (box.hi[v] - box.lo[v]) * u;
    }
  }
  return pts;
}

FixtureSpec perturbed(const FixtureSpec& base, double eps, std::uint64_t seed, double width, const Point& center) {
  if (!std::isfinite(eps)) throw std::invalid_argument("fixture perturbed: eps must be finite");
  if (!(width > 0.0)) throw std::invalid_argument("fixture perturbed: width must be positive");
  FixtureSpec f = base;
  f.id = "perturbed";
  f.params = {{"eps", eps}, {"seed", static_cast<double>(seed)}, {"width", width}};
  for (int v = 0; v < 4; ++v) f.params["c" + std::to_string(v + 1)] = center[v];
  for (const auto& [k, v] : base.params) f.params["base." + k] = v;
  if (eps == 0.0) return f;

  Box support;
  for (int v = 0; v < 4; ++v) {
    support.lo[v] = center[v] - width;
    support.hi[v] = center[v] + width;
  }
  const Box domain = base.metric.domain().intersect(support);
  Box sample;
  for (int v = 0; v < 4; ++v) {
    sample.lo[v] = std::max(base.sample_box.lo[v], center[v] - 0.5 * width);
    sample.hi[v] = std::min(base.sample_box.hi[v], center[v] + 0.5 * width);
    if (!(sample.lo[v] < sample.hi[v])) throw std::invalid_argument("fixture perturbed: bump misses the base sample box");
  }
  Expr bump = 1.0;
  for (int v = 0; v < 4; ++v) {
    const Expr t = (x(v) - center[v]) / width;
    const Expr q = 1.0 - t * t;
    bump = bump * q * q * q;
  }
  // Positivity is checked on a grid over the sampling box plus its corners.
  std::vector<Point> grid;
  for (int k = 0; k < 625; ++k) {
    Point p{};
    int r = k;
    for (int v = 0; v < 4; ++v) {
      const int i = r % 5;
      r /= 5;
      p[v] = sample.lo[v] + (sample.hi[v] - sample.lo[v]) * (0.02 + 0.96 * i / 4.0);
    }
    grid.push_back(p);
  }
  const int n = base.metric.dim();
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt) * kSubSeedStride);
    std::vector<Expr> full(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const double pij = 2.0 * unit_uniform(rng()) - 1.0;
        const Expr e = base.metric.component(i, j) + (eps * pij) * bump;
        full[static_cast<std::size_t>(i * n + j)] = e;
        full[static_cast<std::size_t>(j * n + i)] = e;
      }
    }
    MetricField g(n, full, domain);
    if (!g.positive_definite_at(grid)) continue;
    f.metric = std::move(g);
    f.params["attempt"] = attempt;
    f.facts = KnownFacts{};
    f.sample_box = sample;
    for (auto& [name, pot] : f.potentials) pot = ScalarField(pot.expr(), domain);
    f.quadrature = QuadratureDomain{};
    f.quadrature.box = domain;
    return f;
  }
  throw DegenerateMetricError("fixture perturbed: no positive definite perturbation after 8 attempts");
}

FixtureSpec make_fixture(const FixtureRequest& req) {
  const auto& p = req.params;
  if (req.id == "s4_round") return s4_round(p);
  if (req.id == "flat_torus") return flat_torus(p);
  if (req.id == "cp2_fubini_study") return cp2_fubini_study(p);
  if (req.id == "s2xs2") return s2xs2(p);
  if (req.id == "conformal_flat") return conformal_flat(p);
  if (req.id == "perturbed") {
    check_known("perturbed", p, {"eps", "seed", "width", "c1", "c2", "c3", "c4"});
    const FixtureSpec base = req.base ? make_fixture(*req.base) : s4_round({});
    const double seed = param(p, "seed", 1.0);
    if (seed < 0 || seed != std::floor(seed)) throw std::invalid_argument("fixture perturbed: seed must be a non-negative integer");
    const Point c{param(p, "c1", 0.0), param(p, "c2", 0.0), param(p, "c3", 0.0), param(p, "c4", 0.0)};
    return perturbed(base, param(p, "eps", 0.05), static_cast<std::uint64_t>(seed), param(p, "width", 1.0), c);
  }
  throw std::invalid_argument("unknown fixture id '" + req.id + "'");
}

FixtureSpec fixture(const std::string& id, const std::map<std::string, double>& params) {
  return make_fixture(FixtureRequest{id, params, nullptr});
}

FixtureSpec random_fixture(const std::string& kind, std::uint64_t seed) {
  if (kind == "conformal_flat") return conformal_flat({{"seed", static_cast<double>(seed)}});
  if (kind == "perturbed") return perturbed(s4_round({}), 0.05, seed);
  throw std::invalid_argument("random_fixture: kind must be conformal_flat or perturbed");
}

const std::vector<FixtureInfo>& fixture_catalog() {
  static const std::vector<FixtureInfo> info{
      {"s4_round", {{"r", 1.0}}, "round 4-sphere of radius r, stereographic chart; potentials height1..height5"},
      {"flat_torus", {}, "Euclidean metric on the unit box"},
      {"cp2_fubini_study", {{"scale", 1.0}}, "Fubini-Study metric on CP^2, affine chart, R = 24/scale"},
      {"s2xs2", {{"a", 1.0}, {"b", 1.0}}, "product of round 2-spheres of radii a and b"},
      {"conformal_flat", {{"seed", 1.0}, {"amplitude", 0.3}}, "exp(2 phi) delta with a random cubic phi on (-1,1)^4"},
      {"perturbed",
       {{"eps", 0.05}, {"seed", 1.0}, {"width", 1.0}, {"c1", 0.0}, {"c2", 0.0}, {"c3", 0.0}, {"c4", 0.0}},
       "base metric plus a compactly supported random bump (base defaults to s4_round)"},
  };
  return info;
}

namespace {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

Rule gauss_legendre(int m) {
  Rule r;
  const std::vector<double> pos = boost::math::legendre_p_zeros<double>(m);
  for (double z : pos) {
    const double dp = boost::math::legendre_p_prime<double>(m, z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    if (z == 0.0) {
      r.nodes.push_back(0.0);
      r.weights.push_back(w);
    } else {
      r.nodes.push_back(z);
      r.weights.push_back(w);
      r.nodes.push_back(-z);
      r.weights.push_back(w);
    }
  }
  return r;
}

// Pairwise sum, deterministic for a fixed input order.
double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

}  // namespace

QuadratureResult total_scalar_curvature(const FixtureSpec& fx, const QuadratureSpec& spec) {
  const MetricField& g = fx.metric;
  if (g.dim() != 4) throw std::invalid_argument("total_scalar_curvature: 4-dimensional metric required");
  if (spec.min_order < 2 || spec.max_order < spec.min_order || spec.order_step < 1) {
    throw std::invalid_argument("total_scalar_curvature: invalid order schedule");
  }
  const QuadratureDomain& dom = fx.quadrature;
  const double radius = spec.radius.value_or(dom.radius);
  std::array<double, 4> lo{}, hi{};
  for (int v = 0; v < 4; ++v) {
    if (dom.whole_chart) {
      if (!(radius > 0.0)) throw std::invalid_argument("total_scalar_curvature: truncation radius must be positive");
      hi[v] = std::atan(radius / dom.scale[v]);
      lo[v] = -hi[v];
    } else {
      lo[v] = dom.box.lo[v];
      hi[v] = dom.box.hi[v];
      if (!std::isfinite(lo[v]) || !std::isfinite(hi[v])) {
        throw QuadratureError("total_scalar_curvature: fixture has no finite integration region");
      }
    }
  }

  QuadratureResult prev;
  bool have_prev = false;
  for (int m = spec.min_order; m <= spec.max_order; m += spec.order_step) {
    const Rule rule = gauss_legendre(m);
    std::array<std::vector<double>, 4> xs, ws;
    for (int v = 0; v < 4; ++v) {
      const double c = 0.5 * (hi[v] + lo[v]);
      const double h = 0.5 * (hi[v] - lo[v]);
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double u = c + h * rule.nodes[k];
        double xv = u, jac = 1.0;
        if (dom.whole_chart) {
          const double t = std::tan(u);
          xv = dom.scale[v] * t;
          jac = dom.scale[v] * (1.0 + t * t);
        }
        xs[v].push_back(xv);
        ws[v].push_back(h * rule.weights[k] * jac);
      }
    }
    const std::size_t mm = static_cast<std::size_t>(m);
    const std::size_t total = mm * mm * mm * mm;
    std::vector<double> s_terms(total), v_terms(total);
    auto work = [&](std::size_t begin, std::size_t end) {
      for (std::size_t idx = begin; idx < end; ++idx) {
        std::size_t r = idx;
        Point p{};
        double w = 1.0;
        for (int v = 3; v >= 0; --v) {
          const std::size_t k = r % mm;
          r /= mm;
          p[v] = xs[v][k];
          w *= ws[v][k];
        }
        double dens = 0.0;
        const double scal = scalar_curvature_fast(g, p, &dens);
        s_terms[idx] = w * scal * dens;
        v_terms[idx] = w * dens;
      }
    };
    const int threads = std::max(1, spec.threads);
    if (threads == 1) {
      work(0, total);
    } else {
      std::vector<std::thread> pool;
      const std::size_t chunk = (total + static_cast<std::size_t>(threads) - 1) / static_cast<std::size_t>(threads);
      for (int t = 0; t < threads; ++t) {
        const std::size_t b = std::min(total, static_cast<std::size_t>(t) * chunk);
        const std::size_t e = std::min(total, b + chunk);
        pool.emplace_back(work, b, e);
      }
      for (auto& th : pool) th.join();
    }
    QuadratureResult cur;
    cur.total_scalar_curvature = pairwise_sum(s_terms.data(), total);
    cur.volume = pairwise_sum(v_terms.data(), total);
    cur.order = m;
    cur.radius = dom.whole_chart ? radius : 0.0;
    if (!std::isfinite(cur.total_scalar_curvature) || !std::isfinite(cur.volume)) {
      throw QuadratureError("total_scalar_curvature: integrand is not finite");
    }
    if (have_prev) {
      const double dv = std::abs(cur.volume - prev.volume) / std::max(std::abs(cur.volume), 1e-300);
      const double ds = std::abs(cur.total_scalar_curvature - prev.total_scalar_curvature) /
                        std::max(std::abs(cur.total_scalar_curvature), 1e-10 * std::abs(cur.volume));
      cur.rel_change = std::max(dv, ds);
      if (cur.rel_change < spec.rel_tol) return cur;
    }
    prev = cur;
    have_prev = true;
  }
  throw QuadratureError("total_scalar_curvature: refinement did not settle by order " + std::to_string(spec.max_order) +
                        " (last relative change " + std::to_string(prev.rel_change) + ")");
}

Point project_to_level_set(const ScalarField& f, Point p, double c, int dim) {
  for (int it = 0; it < 50; ++it) {
    const Jet j = f.expr().jet(p, 1);
    const double r = j.value() - c;
    if (std::abs(r) < 1e-13) return p;
    double n2 = 0.0;
    std::array<double, 4> grad{};
    for (int v = 0; v < dim; ++v) {
      MultiIndex a{};
      a[v] = 1;
      grad[v] = j.partial(a);
      n2 += grad[v] * grad[v];
    }
    if (!(n2 > 1e-24)) throw CriticalPointError("project_to_level_set: vanishing gradient");
    for (int v = 0; v < dim; ++v) p[v] -= r * grad[v] / n2;
  }
  if (std::abs(f.expr()(p) - c) > 1e-10) throw std::invalid_argument("project_to_level_set: Newton iteration did not converge");
  return p;
}

}  // namespace cpecheck
