#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cpecheck/catalog.hpp"
#include "cpecheck/cpe.hpp"
#include "cpecheck/curvature.hpp"
#include "cpecheck/errors.hpp"
#include "cpecheck/report.hpp"

namespace py = pybind11;
using namespace cpecheck;

namespace {

py::array_t<double> to_array(const TensorValue& t) {
  std::vector<py::ssize_t> shape(static_cast<std::size_t>(t.rank()), t.dim());
  py::array_t<double> a(shape);
  const auto src = t.entries();
  std::copy(src.begin(), src.end(), a.mutable_data());
  return a;
}

Point to_point(const std::vector<double>& x) {
  if (x.size() != 4) throw py::value_error("points have 4 coordinates");
  return {x[0], x[1], x[2], x[3]};
}

ScalarField resolve_potential(const FixtureSpec& fx, const std::string& potential) {
  for (const auto& [name, f] : fx.potentials)
    if (name == potential) return f;
  return ScalarField(parse_expression(potential));
}

py::dict curvature(const std::string& id, const std::vector<double>& x, const std::map<std::string, double>& params,
                   const std::string& jet) {
  const FixtureSpec fx = fixture(id, params);
  const CurvaturePoint cp = curvature_at(fx.metric, to_point(x), jet_mode_from_string(jet));
  py::dict d;
  d["metric"] = to_array(cp.g);
  d["christoffel"] = to_array(cp.christoffel);
  d["riemann"] = to_array(cp.riemann);
  d["ricci"] = to_array(cp.ricci);
  d["scalar"] = cp.scalar;
  return d;
}

py::dict cpe_residuals(const std::string& id, const std::string& potential, const std::vector<double>& x,
                       const std::map<std::string, double>& params, const std::string& jet) {
  const FixtureSpec fx = fixture(id, params);
  const CPEInstance inst(fx.metric, resolve_potential(fx, potential));
  const CPEPoint p(inst, to_point(x), jet_mode_from_string(jet));
  py::dict d;
  d["cpe"] = to_array(cpe_residual(p));
  d["cpe_via_adjoint"] = to_array(cpe_residual_via_adjoint(p));
  d["trace"] = trace_residual(p);
  d["lemma21"] = to_array(lemma21_residual(p));
  d["scalar"] = p.scalar();
  return d;
}

std::string run(const std::string& text, int threads, bool include_run_info) {
  Scenario s = parse_scenario(text);
  s.threads = threads;
  IdentityReport r;
  {
    py::gil_scoped_release release;
    r = run_scenario(s);
  }
  return report_to_json(r, include_run_info).dump(2);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Numerical identity checks for critical point equation metrics";

  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
  py::register_exception<CheckEvaluationError>(m, "CheckEvaluationError", PyExc_RuntimeError);

  m.attr("__version__") = tool_version();

  m.def("list_fixtures", [] {
    py::list out;
    for (const FixtureInfo& f : fixture_catalog()) {
      py::dict d;
      d["id"] = f.id;
      d["params"] = f.params;
      d["description"] = f.description;
      out.append(d);
    }
    return out;
  });

  m.def("list_checks", [] {
    py::list out;
    for (const CheckInfo& c : check_catalog()) {
      py::dict d;
      d["id"] = c.id;
      d["tier"] = to_string(c.tier);
      d["description"] = c.description;
      d["needs_regular_point"] = c.needs_regular;
      out.append(d);
    }
    return out;
  });

  m.def("curvature_at", &curvature, py::arg("fixture"), py::arg("x"),
        py::arg("params") = std::map<std::string, double>{}, py::arg("jet") = "taylor",
        "Metric, Christoffel symbols, Riemann (0,4), Ricci and scalar curvature at a chart point.");

  m.def("cpe_residuals", &cpe_residuals, py::arg("fixture"), py::arg("potential"), py::arg("x"),
        py::arg("params") = std::map<std::string, double>{}, py::arg("jet") = "taylor",
        "Pointwise residuals for a fixture and a potential given by name or expression.");

  m.def("run_scenario_json", &run, py::arg("text"), py::arg("threads") = 1, py::arg("include_run_info") = false,
        "Runs a scenario given as JSON text and returns the report as JSON text.");
}
