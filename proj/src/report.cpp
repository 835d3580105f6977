#include "cpecheck/report.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "cpecheck/errors.hpp"
#include "cpecheck/operator2.hpp"

namespace cpecheck {

using nlohmann::json;

const char* tool_version() { return "0.1.0"; }

Tolerances Tolerances::defaults(JetMode mode) {
  Tolerances t;
  if (mode == JetMode::fd) t.tier3 = 1e-4;
  return t;
}

double Tolerances::threshold(Tier t) const {
  switch (t) {
    case Tier::tier0: return tier0;
    case Tier::tier2: return tier2;
    case Tier::tier3: return tier3;
    case Tier::tier4: return tier4;
  }
  return tier0;
}

std::string to_string(Tier t) { return "tier" + std::to_string(static_cast<int>(t)); }

namespace {

std::string format_point(const Point& x) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << x[0] << ", " << x[1] << ", " << x[2] << ", " << x[3] << ")";
  return os.str();
}

}  // namespace

CheckEvaluationError::CheckEvaluationError(std::string check, int point, const Point& x, const std::string& msg)
    : std::runtime_error("check '" + check + "' at point " + std::to_string(point) + " " + format_point(x) + ": " +
                         msg),
      check_(std::move(check)),
      point_(point) {}

// ---------------------------------------------------------------------------
// Check registry

namespace {

struct CheckValue {
  double residual = 0.0;
  std::vector<std::string> flags;
  std::map<std::string, double> extra;
};

struct PointData {
  const CPEInstance& inst;
  const CPEPoint& p;
  const CurvaturePoint& cp;
  const FixtureSpec& fixture;
  JetMode mode;
};

using CheckFn = std::function<CheckValue(const PointData&)>;

double rel(double abs, double scale) { return abs / std::max(1.0, scale); }

double norm(const TensorValue& t, const CPEPoint& p) { return metric_norm(t, p.g(), p.g_inv()); }

TensorValue weyl_at(const PointData& d) { return weyl_tensor(d.cp); }

CheckValue riemann_symmetries(const PointData& d) {
  const TensorValue& rm = d.cp.riemann;
  const int n = rm.dim();
  double b = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) b = std::max(b, std::abs(rm(i, j, k, l) + rm(j, k, i, l) + rm(k, i, j, l)));
  return {std::max(symmetry_violation(rm, Symmetry::riemann), rel(b, max_abs(rm))), {}, {}};
}

CheckValue metric_compatibility(const PointData& d) {
  const LocalGeometry& geom = d.p.geometry();
  const TensorValue dg = value_of(geom.covariant_derivative(geom.metric()));
  return {rel(max_abs(dg), max_abs(d.p.g())), {}, {}};
}

CheckValue contracted_bianchi(const PointData& d) {
  const LocalGeometry& geom = d.p.geometry();
  const TensorValue dric = value_of(geom.covariant_derivative(geom.ricci()));
  const int n = geom.dim();
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    double div = 0.0;
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i) div += d.p.g_inv()(a, i) * dric(a, i, j);
    worst = std::max(worst, std::abs(div - 0.5 * geom.scalar().derivative(j).value()));
  }
  return {rel(worst, max_abs(dric)), {}, {}};
}

CheckValue ricci_traceless_norm(const PointData& d) {
  const int n = d.p.dim();
  std::vector<double> m(static_cast<std::size_t>(n * n), 0.0), g(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      g[static_cast<std::size_t>(i * n + j)] = d.p.g()(i, j);
      for (int k = 0; k < n; ++k) m[static_cast<std::size_t>(i * n + j)] += d.p.g_inv()(i, k) * d.p.ricci()(k, j);
    }
  const Operator2 s(n, m, g);
  const double full = hs_norm2(s);
  const double lhs = hs_norm2(traceless_part(s));
  const double rhs = full - s.trace() * s.trace() / n;
  return {rel(std::abs(lhs - rhs), full), {}, {{"traceless_ricci_norm2", lhs}}};
}

CheckValue weyl_trace_free(const PointData& d) {
  const TensorValue w = weyl_at(d);
  double worst = symmetry_violation(w, Symmetry::riemann);
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) worst = std::max(worst, rel(max_abs(contract(w, a, b, &d.p.g_inv())), max_abs(w)));
  return {worst, {}, {{"weyl_norm", norm(w, d.p)}}};
}

CheckValue cotton_schouten(const PointData& d) {
  const TensorValue c = cotton_tensor(d.p.geometry());
  return {rel(max_abs(c - schouten_cotton(d.p.geometry())), max_abs(c)), {}, {{"cotton_norm", norm(c, d.p)}}};
}

CheckValue cotton_weyl(const PointData& d) {
  const TensorValue c = cotton_tensor(d.p.geometry());
  return {rel(max_abs(cotton_weyl_residual(d.p.geometry())), max_abs(c)), {}, {{"cotton_norm", norm(c, d.p)}}};
}

CheckValue hodge_algebra(const PointData& d) {
  const Frame fr = orthonormal_frame(d.cp.g, d.cp.point);
  double worst = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      const Bivector w = bivector_from_frame(wedge(a, b), fr);
      worst = std::max(worst, (hodge_star(hodge_star(w, fr), fr) - w).cwiseAbs().maxCoeff());
    }
  const TwoFormSplit& split = two_form_split();
  Bivector any = Bivector::Zero();
  for (int k = 0; k < 3; ++k) {
    const Bivector& p = split.lambda_plus[static_cast<std::size_t>(k)];
    const Bivector& m = split.lambda_minus[static_cast<std::size_t>(k)];
    worst = std::max(worst, (hodge_star(p) - p).cwiseAbs().maxCoeff());
    worst = std::max(worst, (hodge_star(m) + m).cwiseAbs().maxCoeff());
    any += (k + 1.0) * p - (2.0 * k - 1.0) * m;
  }
  // Projection completeness on a fixed bivector mixing both halves.
  any += wedge(0, 2);
  Bivector recon = Bivector::Zero();
  for (int k = 0; k < 3; ++k) {
    const Bivector& p = split.lambda_plus[static_cast<std::size_t>(k)];
    const Bivector& m = split.lambda_minus[static_cast<std::size_t>(k)];
    recon += bivector_inner(any, p) * p + bivector_inner(any, m) * m;
  }
  worst = std::max(worst, (recon - any).cwiseAbs().maxCoeff());
  return {worst, {}, {}};
}

CheckValue weyl_blocks_check(const PointData& d) {
  const Frame fr = orthonormal_frame(d.cp.g, d.cp.point);
  const TensorValue wf = to_frame(weyl_at(d), fr);
  const WeylBlocks b = weyl_blocks(wf, to_frame(d.cp.ricci, fr), d.cp.scalar);
  const Matrix6 m = curvature_operator_blocks(d.cp, fr);
  const Matrix3 shift = d.cp.scalar / 12.0 * Matrix3::Identity();
  double worst = 0.0;
  worst = std::max(worst, (m.topLeftCorner<3, 3>() - (b.w_plus + shift)).cwiseAbs().maxCoeff());
  worst = std::max(worst, (m.bottomRightCorner<3, 3>() - (b.w_minus + shift)).cwiseAbs().maxCoeff());
  worst = std::max(worst, (b.w_plus - b.w_plus.transpose()).cwiseAbs().maxCoeff());
  worst = std::max(worst, std::abs(b.w_plus.trace()) + std::abs(b.w_minus.trace()));
  const TensorValue wp = to_frame(value_of(self_dual_part(d.p.geometry(), weyl_jet(d.p.geometry()), 1)), fr);
  worst = std::max(worst, std::abs(wp(0, 1, 2, 3) - 0.5 * (wf(0, 1, 2, 3) + wf(0, 1, 0, 1))));
  const double ric0 = m.topRightCorner<3, 3>().norm();
  return {rel(worst, m.cwiseAbs().maxCoeff()),
          {},
          {{"w_plus_norm", b.w_plus.norm()}, {"w_minus_norm", b.w_minus.norm()}, {"ricci_block_norm", ric0}}};
}

CheckValue div_weyl(const PointData& d) {
  const DivWeylSplit s = div_weyl_split(d.p.geometry());
  return {rel(std::abs(s.norm2 - s.norm2_plus - s.norm2_minus), s.norm2),
          {},
          {{"div_w_norm2", s.norm2}, {"div_w_plus_norm2", s.norm2_plus}, {"div_w_minus_norm2", s.norm2_minus}}};
}

CheckValue weitzenbock(const PointData& d) {
  const WeitzenbockTerms t = weitzenbock_residual(d.p.geometry());
  const double scale =
      std::max({std::abs(t.lhs), 2.0 * t.grad_norm2, std::abs(t.scalar) * t.norm2, 36.0 * std::abs(t.det)});
  return {rel(std::abs(t.residual), scale),
          {},
          {{"lhs", t.lhs}, {"rhs", t.rhs}, {"w_plus_norm2", t.norm2}, {"det_w_plus", t.det}}};
}

double ricci_scale(const PointData& d) { return norm(d.p.ricci(), d.p); }

CheckValue linearized_adjoint_check(const PointData& d) {
  return {rel(norm(linearized_adjoint(d.p), d.p), ricci_scale(d)), {}, {}};
}

CheckValue cpe_check(const PointData& d) { return {rel(norm(cpe_residual(d.p), d.p), ricci_scale(d)), {}, {}}; }

CheckValue cpe_adjoint_check(const PointData& d) {
  return {rel(norm(cpe_residual_via_adjoint(d.p), d.p), ricci_scale(d)), {}, {}};
}

CheckValue adjoint_consistency(const PointData& d) {
  const TensorValue a = cpe_residual(d.p);
  const TensorValue b = cpe_residual_via_adjoint(d.p);
  const double t = trace_residual(d.p);
  TensorValue s = a + b;
  for (int i = 0; i < d.p.dim(); ++i)
    for (int j = 0; j < d.p.dim(); ++j) s(i, j) += t * d.p.g()(i, j);
  return {rel(norm(s, d.p), ricci_scale(d) + std::abs(t)),
          {},
          {{"cpe_norm", norm(a, d.p)}, {"via_adjoint_norm", norm(b, d.p)}}};
}

CheckValue trace_check(const PointData& d) {
  const double t = trace_residual(d.p);
  const double scale = std::max(std::abs(d.p.laplacian()), std::abs(d.p.scalar() * d.p.f().value()) / (d.p.dim() - 1));
  return {rel(std::abs(t), scale), {}, {}};
}

CheckValue trace_consistency(const PointData& d) {
  const TensorValue a = cpe_residual(d.p);
  const double tr = contract(a, 0, 1, &d.p.g_inv()).entries()[0];
  const double t = trace_residual(d.p);
  return {rel(std::abs(tr + t), std::abs(t) + ricci_scale(d)), {}, {}};
}

CheckValue tensor_t_check(const PointData& d) {
  const TensorValue t = tensor_T(d.p);
  double anti = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) anti = std::max(anti, std::abs(t(i, j, k) + t(j, i, k)));
  return {rel(norm(t, d.p), ricci_scale(d) * d.p.grad_norm()), {}, {{"antisymmetry", anti}}};
}

CheckValue t_contract(const PointData& d) {
  const TContraction t = t_contract_gradient(d.p);
  return {rel(max_abs(t.contracted - t.reduced), max_abs(t.reduced)), {}, {}};
}

CheckValue lemma21(const PointData& d) {
  CheckValue v;
  const TensorValue r = lemma21_residual(d.p);
  const double f1 = d.p.f().value() + 1.0;
  const TensorValue c = cotton_tensor(d.p.geometry());
  const double scale = std::max({std::abs(f1) * norm(c, d.p), norm(tensor_T(d.p), d.p),
                                 norm(weyl_at(d), d.p) * d.p.grad_norm()});
  v.residual = rel(norm(r, d.p), scale);
  if (std::abs(f1) < 1e-8) v.flags.emplace_back("f_plus_one_small");
  return v;
}

CheckValue eigensystem(const PointData& d) {
  const RicciEigensystem es = ricci_eigensystem_residual(d.p);
  const double spread = es.eigenvalues[3] - es.eigenvalues[0];
  // Only the norm is independent of the basis chosen inside tied eigenspaces.
  const double norm = std::hypot(es.residuals[0], es.residuals[1], es.residuals[2]);
  CheckValue v{rel(norm, spread * d.p.grad_norm() * d.p.grad_norm()), {}, {}};
  for (int k = 0; k < 4; ++k) v.extra["lambda" + std::to_string(k + 1)] = es.eigenvalues[static_cast<std::size_t>(k)];
  return v;
}

CheckValue level_set_normal(const PointData& d) {
  const LevelSetData ls = level_set_geometry(d.p);
  const TensorValue gf = to_frame(d.p.g(), ls.frame);
  double worst = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) worst = std::max(worst, std::abs(gf(a, b) - (a == b ? 1.0 : 0.0)));
  // e_1 is the unit gradient: df(e_1) = |grad f| and df(e_a) = 0 for tangent a.
  for (int a = 0; a < 4; ++a) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += ls.frame.vectors(a, i) * d.p.df()(i);
    worst = std::max(worst, rel(std::abs(s - (a == 0 ? ls.grad_norm : 0.0)), ls.grad_norm));
  }
  return {worst, {}, {}};
}

CheckValue level_set_umbilic(const PointData& d) {
  const LevelSetData ls = level_set_geometry(d.p);
  return {rel(ls.umbilic_defect, ls.h.norm()),
          {},
          {{"mean_curvature", ls.mean_curvature},
           {"mean_curvature_grad2", ls.mean_curvature_grad2},
           {"grad_norm", ls.grad_norm}}};
}

CheckValue codazzi(const PointData& d) {
  const TensorValue r = codazzi_residual(d.p);
  return {rel(max_abs(r), norm(d.cp.riemann, d.p)), {}, {}};
}

CheckValue cotton_chain(const PointData& d) {
  const CottonChain c = delta_wplus_cotton_chain(d.p);
  return {rel(max_abs(c.residual1), norm(cotton_tensor(d.p.geometry()), d.p)), {}, {}};
}

CheckValue t_bar(const PointData& d) {
  const CottonChain c = delta_wplus_cotton_chain(d.p);
  return {rel(max_abs(c.residual2), ricci_scale(d) * d.p.grad_norm() * d.p.grad_norm()), {}, {}};
}

CheckValue constant_scalar(const PointData& d) {
  const double mean = d.inst.scalar_curvature();
  return {rel(std::abs(d.p.scalar() - mean), std::abs(mean)), {}, {{"scalar_curvature", d.p.scalar()}}};
}

std::array<double, 3> spectrum(const Matrix3& m) {
  Eigen::SelfAdjointEigenSolver<Matrix3> es(0.5 * (m + m.transpose()));
  return {es.eigenvalues()[0], es.eigenvalues()[1], es.eigenvalues()[2]};
}

CheckValue known_facts(const PointData& d) {
  const KnownFacts& f = d.fixture.facts;
  CheckValue v;
  double worst = 0.0;
  const double scale = std::max(1.0, std::abs(d.cp.scalar));
  auto record = [&](const std::string& name, double err) {
    v.extra[name] = err;
    worst = std::max(worst, err);
  };
  if (f.scalar_curvature) record("scalar_curvature", std::abs(d.cp.scalar - *f.scalar_curvature) / scale);
  TensorValue ric0 = d.cp.ricci;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) ric0(i, j) -= d.cp.scalar / 4.0 * d.cp.g(i, j);
  const double ric0_norm = norm(ric0, d.p);
  if (f.einstein && *f.einstein) record("einstein", ric0_norm / scale);
  if (f.einstein && !*f.einstein) v.extra["traceless_ricci_norm"] = ric0_norm;
  const Frame fr = orthonormal_frame(d.cp.g, d.cp.point);
  const TensorValue w = weyl_at(d);
  if (f.weyl_zero && *f.weyl_zero) record("weyl_zero", rel(max_abs(w), max_abs(d.cp.riemann)));
  const WeylBlocks b = weyl_blocks(to_frame(w, fr), to_frame(d.cp.ricci, fr), d.cp.scalar);
  if (f.w_minus_zero && *f.w_minus_zero) record("w_minus_zero", b.w_minus.norm() / scale);
  if (f.cotton_zero && *f.cotton_zero) record("cotton_zero", rel(norm(cotton_tensor(d.p.geometry()), d.p), scale));
  auto spectral = [&](const std::string& name, const Matrix3& m, const std::array<double, 3>& want) {
    const auto got = spectrum(m);
    double e = 0.0;
    for (int k = 0; k < 3; ++k) e = std::max(e, std::abs(got[static_cast<std::size_t>(k)] - want[static_cast<std::size_t>(k)]));
    record(name, e / scale);
  };
  if (f.w_plus_spectrum) spectral("w_plus_spectrum", b.w_plus, *f.w_plus_spectrum);
  if (f.w_minus_spectrum) spectral("w_minus_spectrum", b.w_minus, *f.w_minus_spectrum);
  if (f.ricci_eigenvalues) {
    const TensorValue rf = to_frame(d.cp.ricci, fr);
    Eigen::Matrix4d m;
    for (int a = 0; a < 4; ++a)
      for (int c = 0; c < 4; ++c) m(a, c) = 0.5 * (rf(a, c) + rf(c, a));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m);
    double e = 0.0;
    for (int k = 0; k < 4; ++k) e = std::max(e, std::abs(es.eigenvalues()[k] - (*f.ricci_eigenvalues)[static_cast<std::size_t>(k)]));
    record("ricci_eigenvalues", e / scale);
  }
  v.residual = worst;
  return v;
}

struct CheckDef {
  CheckInfo info;
  CheckFn fn;  // empty for checks evaluated by the runner itself
};

const std::vector<CheckDef>& registry() {
  static const std::vector<CheckDef> defs{
      {{"riemann_symmetries", Tier::tier0, "pair symmetries and first Bianchi identity of Riemann", 2, false},
       riemann_symmetries},
      {{"metric_compatibility", Tier::tier2, "covariant derivative of the metric vanishes", 2, false},
       metric_compatibility},
      {{"contracted_bianchi", Tier::tier3, "div Ric = dR / 2", 3, false}, contracted_bianchi},
      {{"ricci_traceless_norm", Tier::tier0, "|Ric0|^2 = |Ric|^2 - R^2/n for the Ricci operator", 2, false},
       ricci_traceless_norm},
      {{"weyl_trace_free", Tier::tier0, "W has curvature symmetries and vanishing traces", 2, false}, weyl_trace_free},
      {{"cotton_schouten", Tier::tier3, "Cotton tensor equals the antisymmetrized derivative of Schouten", 3, false},
       cotton_schouten},
      {{"cotton_weyl", Tier::tier3, "C + (n-2)/(n-3) div W = 0", 3, false}, cotton_weyl},
      {{"hodge_algebra", Tier::tier0, "** = Id on 2-forms; Lambda+- bases are +-1 eigenvectors; completeness", 2,
        false},
       hodge_algebra},
      {{"weyl_blocks", Tier::tier0, "diagonal blocks of the curvature operator equal W+- + R/12 Id", 2, false},
       weyl_blocks_check},
      {{"div_weyl_split", Tier::tier3, "|dW|^2 = |dW+|^2 + |dW-|^2", 3, false}, div_weyl},
      {{"weitzenbock", Tier::tier4, "Lap|W+|^2 = 2|DW+|^2 + R|W+|^2 - 36 det W+ (harmonic W+ only)", 4, false},
       weitzenbock},
      {{"constant_scalar_curvature", Tier::tier2, "R equals its mean over the sample", 2, false}, constant_scalar},
      {{"linearized_adjoint", Tier::tier2, "norm of L*(f) = -(Lap f) g + Hess f - f Ric", 2, false},
       linearized_adjoint_check},
      {{"cpe_residual", Tier::tier2, "norm of Ric0 - Hess f + (Ric - R/(n-1) g) f", 2, false}, cpe_check},
      {{"cpe_residual_via_adjoint", Tier::tier2, "norm of L*(f) - Ric0", 2, false}, cpe_adjoint_check},
      {{"adjoint_consistency", Tier::tier0, "cpe_residual + via_adjoint + trace_residual g = 0", 2, false},
       adjoint_consistency},
      {{"trace_residual", Tier::tier2, "Lap f + R f/(n-1)", 2, false}, trace_check},
      {{"trace_consistency", Tier::tier0, "trace of cpe_residual equals -trace_residual", 2, false},
       trace_consistency},
      {{"tensor_t", Tier::tier2, "norm of T (vanishes on Einstein metrics)", 2, false}, tensor_t_check},
      {{"t_contract_gradient", Tier::tier0, "T_ijk f^k = (R_ik f_j - R_jk f_i) f^k", 2, false}, t_contract},
      {{"lemma21", Tier::tier3, "(f+1) C_ijk - W_ijks f^s - T_ijk (CPE instances)", 3, false}, lemma21},
      {{"ricci_eigensystem", Tier::tier2, "bilinear Ricci eigenvalue system in the eigenframe", 2, true},
       eigensystem},
      {{"level_set_normal", Tier::tier0, "adapted frame is orthonormal with e1 = grad f/|grad f|", 2, true},
       level_set_normal},
      {{"level_set_umbilic", Tier::tier2, "traceless part of the second fundamental form", 2, true},
       level_set_umbilic},
      {{"codazzi", Tier::tier3, "R_abc1 - (D_b h_ac - D_a h_bc) on level sets (universal)", 3, true}, codazzi},
      {{"gradient_norm_constancy", Tier::tier2, "|grad f|^2 along one level set, relative to a reference point", 2,
        true},
       {}},
      {{"delta_wplus_cotton", Tier::tier3, "4 dW+_jkl = C_klj + C_{kb lb j} (constant R)", 3, false}, cotton_chain},
      {{"t_bar_contraction", Tier::tier2, "(T_ijk + T_{ib jb k}) f^k in the orthonormal frame", 2, false}, t_bar},
      {{"known_facts", Tier::tier2, "fixture facts: R, Einstein, W, W-, Cotton, spectra, Ricci eigenvalues", 3,
        false},
       known_facts},
  };
  return defs;
}

const CheckDef& check_def(const std::string& id) {
  for (const CheckDef& d : registry())
    if (d.info.id == id) return d;
  throw std::invalid_argument("unknown check id '" + id + "'");
}

}  // namespace

const std::vector<CheckInfo>& check_catalog() {
  static const std::vector<CheckInfo> infos = [] {
    std::vector<CheckInfo> out;
    for (const CheckDef& d : registry()) out.push_back(d.info);
    return out;
  }();
  return infos;
}

const CheckInfo& check_info(const std::string& id) { return check_def(id).info; }

// ---------------------------------------------------------------------------
// Scenario parsing

namespace {

std::string line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& [k, v] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ScenarioError(path + "/" + k, "unknown key");
  }
}

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ScenarioError(path, "expected an object");
  return j;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ScenarioError(path, "expected a number");
  return j.get<double>();
}

std::string text_of(const json& j, const std::string& path) {
  if (!j.is_string()) throw ScenarioError(path, "expected a string");
  return j.get<std::string>();
}

Expr expression(const json& j, const std::string& path) {
  const std::string s = text_of(j, path);
  try {
    return parse_expression(s);
  } catch (const ParseError& e) {
    throw ScenarioError(path, e.what());
  }
}

Point point_of(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 4) throw ScenarioError(path, "expected an array of 4 numbers");
  Point p{};
  for (std::size_t v = 0; v < 4; ++v) p[v] = number(j[v], path + "/" + std::to_string(v));
  return p;
}

Box box_of(const json& j, const std::string& path) {
  require_object(j, path);
  only_keys(j, path, {"lo", "hi"});
  if (!j.contains("lo") || !j.contains("hi")) throw ScenarioError(path, "box needs lo and hi");
  Box b;
  b.lo = point_of(j["lo"], path + "/lo");
  b.hi = point_of(j["hi"], path + "/hi");
  for (int v = 0; v < 4; ++v)
    if (!(b.lo[v] < b.hi[v])) throw ScenarioError(path, "box must have lo < hi on every axis");
  return b;
}

FixtureRequest fixture_request(const json& j, const std::string& path) {
  require_object(j, path);
  only_keys(j, path, {"id", "params", "base"});
  if (!j.contains("id")) throw ScenarioError(path, "fixture needs an id (or an inline metric)");
  FixtureRequest r;
  r.id = text_of(j["id"], path + "/id");
  if (j.contains("params")) {
    require_object(j["params"], path + "/params");
    for (const auto& [k, v] : j["params"].items()) r.params[k] = number(v, path + "/params/" + k);
  }
  if (j.contains("base")) r.base = std::make_shared<FixtureRequest>(fixture_request(j["base"], path + "/base"));
  return r;
}

FixtureSpec inline_fixture(const json& j, const std::string& path) {
  only_keys(j, path, {"metric", "domain", "sample_box"});
  const json& m = require_object(j["metric"], path + "/metric");
  only_keys(m, path + "/metric", {"conformal_factor", "components"});
  const Box domain = j.contains("domain") ? box_of(j["domain"], path + "/domain") : Box::whole();
  FixtureSpec f;
  f.id = "inline";
  try {
    if (m.contains("conformal_factor")) {
      f.metric = MetricField::conformally_flat(4, expression(m["conformal_factor"], path + "/metric/conformal_factor"),
                                               domain);
    } else if (m.contains("components")) {
      const json& c = m["components"];
      const std::string cp = path + "/metric/components";
      if (!c.is_array() || c.size() != 4) throw ScenarioError(cp, "expected a 4x4 array of expressions");
      std::vector<Expr> comps(16);
      for (std::size_t i = 0; i < 4; ++i) {
        if (!c[i].is_array() || c[i].size() != 4) throw ScenarioError(cp + "/" + std::to_string(i), "expected 4 entries");
        for (std::size_t k = 0; k < 4; ++k) {
          const json& e = c[i][k];
          comps[i * 4 + k] = e.is_number() ? Expr(e.get<double>())
                                           : expression(e, cp + "/" + std::to_string(i) + "/" + std::to_string(k));
        }
      }
      for (int i = 0; i < 4; ++i)
        for (int k = i + 1; k < 4; ++k)
          if (c[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] !=
              c[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]) {
            throw ScenarioError(cp, "components must be symmetric");
          }
      // Share nodes across the diagonal so the field sees a symmetric matrix.
      for (int i = 0; i < 4; ++i)
        for (int k = i + 1; k < 4; ++k) comps[static_cast<std::size_t>(k * 4 + i)] = comps[static_cast<std::size_t>(i * 4 + k)];
      f.metric = MetricField(4, comps, domain);
    } else {
      throw ScenarioError(path + "/metric", "needs conformal_factor or components");
    }
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(path + "/metric", e.what());
  }
  f.potentials.emplace_back("zero", ScalarField(Expr(0.0), domain));
  if (j.contains("sample_box")) {
    f.sample_box = box_of(j["sample_box"], path + "/sample_box");
  } else {
    f.sample_box = domain.intersect(Box::cube(-0.5, 0.5));
  }
  return f;
}

Tier tier_from_key(const std::string& k, const std::string& path) {
  if (k == "tier0") return Tier::tier0;
  if (k == "tier2") return Tier::tier2;
  if (k == "tier3") return Tier::tier3;
  if (k == "tier4") return Tier::tier4;
  throw ScenarioError(path, "unknown tier (tier0, tier2, tier3, tier4)");
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    if (const auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw ScenarioError(line_column(text, e.byte == 0 ? 0 : e.byte - 1), msg);
  }
  require_object(j, "");
  only_keys(j, "", {"schema_version", "fixture", "potential", "points", "level", "checks", "jet_mode", "tolerances",
                    "threads"});
  Scenario s;
  if (j.contains("schema_version")) {
    const double v = number(j["schema_version"], "/schema_version");
    if (v != kScenarioSchemaVersion) throw ScenarioError("/schema_version", "unsupported schema version");
  }
  if (!j.contains("fixture")) throw ScenarioError("", "missing key 'fixture'");
  s.fixture_json = j["fixture"];
  require_object(s.fixture_json, "/fixture");
  if (s.fixture_json.contains("metric")) {
    s.fixture = inline_fixture(s.fixture_json, "/fixture");
  } else {
    try {
      s.fixture = make_fixture(fixture_request(s.fixture_json, "/fixture"));
    } catch (const std::invalid_argument& e) {
      throw ScenarioError("/fixture", e.what());
    } catch (const DegenerateMetricError& e) {
      throw ScenarioError("/fixture", e.what());
    }
  }

  s.potential_name = "zero";
  if (j.contains("potential")) {
    const json& p = j["potential"];
    if (p.is_string()) {
      s.potential_name = p.get<std::string>();
    } else if (p.is_object()) {
      only_keys(p, "/potential", {"expr"});
      if (!p.contains("expr")) throw ScenarioError("/potential", "needs expr");
      s.potential_name = text_of(p["expr"], "/potential/expr");
      s.potential = ScalarField(expression(p["expr"], "/potential/expr"), s.fixture.metric.domain());
    } else {
      throw ScenarioError("/potential", "expected a potential name or {\"expr\": ...}");
    }
  }
  if (!j.contains("potential") || j["potential"].is_string()) {
    try {
      s.potential = s.fixture.potential(s.potential_name);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError("/potential", e.what());
    }
  }

  if (j.contains("jet_mode")) {
    try {
      s.jet_mode = jet_mode_from_string(text_of(j["jet_mode"], "/jet_mode"));
    } catch (const std::invalid_argument& e) {
      throw ScenarioError("/jet_mode", e.what());
    }
  }
  s.tolerances = Tolerances::defaults(s.jet_mode);
  if (j.contains("tolerances")) {
    require_object(j["tolerances"], "/tolerances");
    for (const auto& [k, v] : j["tolerances"].items()) {
      const std::string path = "/tolerances/" + k;
      const double t = number(v, path);
      if (!(t > 0.0)) throw ScenarioError(path, "tolerance must be positive");
      switch (tier_from_key(k, path)) {
        case Tier::tier0: s.tolerances.tier0 = t; break;
        case Tier::tier2: s.tolerances.tier2 = t; break;
        case Tier::tier3: s.tolerances.tier3 = t; break;
        case Tier::tier4: s.tolerances.tier4 = t; break;
      }
    }
  }

  if (!j.contains("checks")) throw ScenarioError("", "missing key 'checks'");
  const json& checks = j["checks"];
  if (!checks.is_array() || checks.empty()) throw ScenarioError("/checks", "expected a non-empty array of check ids");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const std::string path = "/checks/" + std::to_string(i);
    const std::string id = text_of(checks[i], path);
    try {
      check_def(id);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(path, e.what());
    }
    if (!seen.insert(id).second) throw ScenarioError(path, "duplicate check '" + id + "'");
    s.checks.push_back(id);
  }

  if (!j.contains("points")) throw ScenarioError("", "missing key 'points'");
  const json& pts = j["points"];
  if (pts.is_array()) {
    if (pts.empty()) throw ScenarioError("/points", "point list is empty");
    for (std::size_t i = 0; i < pts.size(); ++i) s.points.explicit_points.push_back(point_of(pts[i], "/points/" + std::to_string(i)));
  } else if (pts.is_object()) {
    only_keys(pts, "/points", {"count", "seed", "box"});
    if (!pts.contains("count")) throw ScenarioError("/points", "needs count");
    const double c = number(pts["count"], "/points/count");
    if (!(c >= 1 && c <= 100000 && c == std::floor(c))) throw ScenarioError("/points/count", "expected an integer in [1, 100000]");
    s.points.count = static_cast<int>(c);
    if (pts.contains("seed")) {
      if (!pts["seed"].is_number_unsigned()) throw ScenarioError("/points/seed", "expected a non-negative integer");
      s.points.seed = pts["seed"].get<std::uint64_t>();
    }
    if (pts.contains("box")) s.points.box = box_of(pts["box"], "/points/box");
  } else {
    throw ScenarioError("/points", "expected a list of points or {count, seed, box}");
  }

  if (j.contains("level")) s.level = number(j["level"], "/level");
  if (j.contains("threads")) {
    const double t = number(j["threads"], "/threads");
    if (!(t >= 1 && t <= 256 && t == std::floor(t))) throw ScenarioError("/threads", "expected an integer in [1, 256]");
    s.threads = static_cast<int>(t);
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path, "cannot open scenario file");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str());
  } catch (const ScenarioError& e) {
    throw ScenarioError(path + ": " + e.where(), std::string(e.what()).substr(e.where().size() + 2));
  }
}

// ---------------------------------------------------------------------------
// Runner

namespace {

double gradient_norm_at(const ScalarField& f, const MetricField& g, const Point& x) {
  const Jet j = f.expr().jet(x, 1);
  const TensorValue gi = inverse_of(g.at(x));
  double s = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      MultiIndex ia{}, ib{};
      ia[a] = 1;
      ib[b] = 1;
      s += gi(a, b) * j.partial(ia) * j.partial(ib);
    }
  return std::sqrt(std::max(s, 0.0));
}

bool needs_regular(const Scenario& s) {
  return std::any_of(s.checks.begin(), s.checks.end(), [](const std::string& id) { return check_info(id).needs_regular; });
}

std::vector<Point> resolve_points(const Scenario& s) {
  if (!s.points.sampled()) return s.points.explicit_points;
  const Box box = s.points.box ? *s.points.box : s.fixture.sample_box;
  const bool regular = needs_regular(s);
  const int want = s.points.count;
  // Sobol prefixes are stable in the seed, so extra candidates only append.
  const auto candidates = sample_points(box, regular ? 2 * want + 64 : want, s.points.seed);
  std::vector<Point> out;
  for (const Point& x : candidates) {
    if (static_cast<int>(out.size()) == want) break;
    if (regular && !(gradient_norm_at(s.potential, s.fixture.metric, x) >= kRegularPointThreshold)) continue;
    out.push_back(x);
  }
  if (static_cast<int>(out.size()) < want) throw ScenarioError("/points", "too many critical points of f in the sampling box");
  return out;
}

int order_needed(const Scenario& s) {
  int k = 2;
  for (const std::string& id : s.checks) k = std::max(k, check_info(id).order);
  return k;
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

json box_json(const Box& b) { return {{"lo", b.lo}, {"hi", b.hi}}; }

json scenario_echo(const Scenario& s, const std::vector<Point>& pts) {
  json fx = s.fixture_json;
  if (!fx.contains("metric")) {
    fx = {{"id", s.fixture.id}, {"params", s.fixture.params}};
  }
  json points;
  if (s.points.sampled()) {
    points = {{"count", s.points.count},
              {"seed", s.points.seed},
              {"box", box_json(s.points.box ? *s.points.box : s.fixture.sample_box)}};
  } else {
    points = {{"count", pts.size()}};
  }
  json tol = {{"tier0", s.tolerances.tier0}, {"tier2", s.tolerances.tier2}, {"tier3", s.tolerances.tier3},
              {"tier4", s.tolerances.tier4}};
  json e = {{"fixture", fx},     {"potential", s.potential_name}, {"points", points},
            {"checks", s.checks}, {"jet_mode", to_string(s.jet_mode)}, {"tolerances", tol}};
  if (s.level) e["level"] = *s.level;
  return e;
}

void summarize(CheckResult& r) {
  double sum2 = 0.0;
  int n = 0;
  bool finite = true;
  r.summary = {};
  for (const PointResult& p : r.points) {
    if (p.status != "ok") continue;
    ++n;
    if (!std::isfinite(p.residual)) {
      finite = false;
      continue;
    }
    sum2 += p.residual * p.residual;
    if (r.summary.worst_point < 0 || p.residual > r.summary.max) {
      r.summary.max = p.residual;
      r.summary.worst_point = p.index;
    }
  }
  r.summary.rms = n > 0 ? std::sqrt(sum2 / n) : 0.0;
  r.pass = finite && n > 0 && r.summary.max <= r.threshold;
}

}  // namespace

IdentityReport run_scenario(const Scenario& s) {
  const auto start = std::chrono::steady_clock::now();
  IdentityReport rep;
  rep.run_info.timestamp = utc_timestamp();
  rep.run_info.threads = s.threads;
  const std::vector<Point> pts = resolve_points(s);
  rep.scenario = scenario_echo(s, pts);

  std::vector<Point> r_points = pts;
  const CPEInstance inst(s.fixture.metric, s.potential, r_points, false, s.jet_mode);
  const int order = order_needed(s);
  const int npts = static_cast<int>(pts.size());

  std::vector<std::string> pointwise;
  bool gradient_check = false;
  for (const std::string& id : s.checks) {
    if (id == "gradient_norm_constancy") {
      gradient_check = true;
    } else {
      pointwise.push_back(id);
    }
  }

  std::vector<std::vector<PointResult>> cells(static_cast<std::size_t>(npts));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(npts));
  parallel_for(npts, s.threads, [&](int i) {
    const Point& x = pts[static_cast<std::size_t>(i)];
    std::string current = "setup";
    try {
      const CPEPoint p(inst, x, s.jet_mode, order);
      const CurvaturePoint cp = p.geometry().at_point();
      const PointData d{inst, p, cp, s.fixture, s.jet_mode};
      const bool critical = !(p.grad_norm() >= kRegularPointThreshold);
      auto& row = cells[static_cast<std::size_t>(i)];
      for (const std::string& id : pointwise) {
        current = id;
        const CheckDef& def = check_def(id);
        PointResult pr;
        pr.index = i;
        pr.x = x;
        if (def.info.needs_regular && critical) {
          pr.status = "critical";
        } else {
          CheckValue v = def.fn(d);
          pr.residual = v.residual;
          pr.flags = std::move(v.flags);
          pr.extra = std::move(v.extra);
        }
        row.push_back(std::move(pr));
      }
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] =
          std::make_exception_ptr(CheckEvaluationError(current, i, x, e.what()));
    }
  });
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  CheckResult grad;
  if (gradient_check) {
    grad.info = check_info("gradient_norm_constancy");
    const double level = s.level ? *s.level : s.potential(pts.front());
    std::vector<Point> proj(static_cast<std::size_t>(npts));
    std::vector<double> q(static_cast<std::size_t>(npts), 0.0);
    std::vector<GradientNormConstancy> gnc(static_cast<std::size_t>(npts));
    std::vector<std::string> status(static_cast<std::size_t>(npts), "ok");
    parallel_for(npts, s.threads, [&](int i) {
      const auto k = static_cast<std::size_t>(i);
      try {
        proj[k] = project_to_level_set(s.potential, pts[k], level);
        if (!s.fixture.metric.domain().contains(proj[k])) throw DomainError("projected point leaves the chart domain");
        const CPEPoint p(inst, proj[k], s.jet_mode, 3);
        if (!(p.grad_norm() >= kRegularPointThreshold)) {
          status[k] = "critical";
          return;
        }
        q[k] = p.grad_norm() * p.grad_norm();
        gnc[k] = gradient_norm_constancy(inst, {proj[k]}, s.jet_mode);
      } catch (const CriticalPointError&) {
        status[k] = "critical";
      } catch (const std::exception& e) {
        errors[k] = std::make_exception_ptr(CheckEvaluationError(grad.info.id, i, pts[k], e.what()));
      }
    });
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
    int ref = -1;
    for (int i = 0; i < npts && ref < 0; ++i)
      if (status[static_cast<std::size_t>(i)] == "ok") ref = i;
    for (int i = 0; i < npts; ++i) {
      const auto k = static_cast<std::size_t>(i);
      PointResult pr;
      pr.index = i;
      pr.x = proj[k];
      pr.status = status[k];
      if (pr.status == "ok") {
        const double q0 = q[static_cast<std::size_t>(ref)];
        pr.residual = rel(std::abs(q[k] - q0), q0);
        pr.extra = {{"grad_norm2", q[k]},
                    {"level", level},
                    {"tangential", gnc[k].tangential_max},
                    {"cpe_rhs", gnc[k].cpe_rhs_max},
                    {"factor_two_residual", gnc[k].factor_residual_max}};
      }
      grad.points.push_back(std::move(pr));
    }
  }

  int col = 0;
  for (const std::string& id : s.checks) {
    CheckResult r;
    if (id == "gradient_norm_constancy") {
      r = std::move(grad);
    } else {
      r.info = check_info(id);
      for (int i = 0; i < npts; ++i) r.points.push_back(cells[static_cast<std::size_t>(i)][static_cast<std::size_t>(col)]);
      ++col;
    }
    r.threshold = s.tolerances.threshold(r.info.tier);
    summarize(r);
    rep.checks.push_back(std::move(r));
  }
  rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const CheckResult& c) { return c.pass; });
  rep.run_info.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

json report_to_json(const IdentityReport& r, bool include_run_info) {
  json checks = json::array();
  for (const CheckResult& c : r.checks) {
    json points = json::array();
    for (const PointResult& p : c.points) {
      json jp = {{"index", p.index}, {"x", p.x}, {"status", p.status}};
      if (p.status == "ok") jp["residual"] = p.residual;
      if (!p.flags.empty()) jp["flags"] = p.flags;
      if (!p.extra.empty()) jp["extra"] = p.extra;
      points.push_back(std::move(jp));
    }
    json summary = {{"max", c.summary.max}, {"rms", c.summary.rms}, {"worst_point", c.summary.worst_point}};
    checks.push_back({{"id", c.info.id},
                      {"tier", to_string(c.info.tier)},
                      {"threshold", c.threshold},
                      {"description", c.info.description},
                      {"pass", c.pass},
                      {"summary", summary},
                      {"points", points}});
  }
  json out = {{"schema_version", kReportSchemaVersion},
              {"tool", {{"name", "cpecheck"}, {"version", tool_version()}}},
              {"scenario", r.scenario},
              {"pass", r.pass},
              {"checks", checks}};
  if (include_run_info) {
    out["run_info"] = {{"timestamp", r.run_info.timestamp},
                       {"threads", r.run_info.threads},
                       {"wall_seconds", r.run_info.wall_seconds}};
  }
  return out;
}

std::string report_to_csv(const IdentityReport& r) {
  std::string out = "check,tier,threshold,point,x1,x2,x3,x4,status,residual,check_pass\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const CheckResult& c : r.checks) {
    for (const PointResult& p : c.points) {
      out += c.info.id + "," + to_string(c.info.tier) + "," + num(c.threshold) + "," + std::to_string(p.index);
      for (double v : p.x) out += "," + num(v);
      out += "," + p.status + "," + (p.status == "ok" ? num(p.residual) : std::string()) + "," +
             (c.pass ? "true" : "false") + "\n";
    }
  }
  return out;
}

}  // namespace cpecheck
