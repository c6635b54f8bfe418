#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "opfrelax/cases.hpp"
#include "opfrelax/projection.hpp"
#include "opfrelax/recovery.hpp"
#include "opfrelax/report.hpp"

namespace py = pybind11;
using namespace opfrelax;

namespace {

// Results cross the boundary as JSON text; the Python side decodes them.

std::string solve_json(const std::string& case_name, const std::string& relaxation) {
  const CaseData data = load_case(case_name);
  const SolveOutcome out = solve_case(data.network, data.cost, parse_relaxation(relaxation));
  return solve_report(case_name, out).dump();
}

std::string compare_json(const std::string& case_name, bool parallel) {
  const CaseData data = load_case(case_name);
  CompareOptions opt;
  opt.parallel = parallel;
  const Comparison cmp = compare_relaxations(data.network, data.cost, opt);
  nlohmann::json j;
  j["case"] = case_name;
  j["ordering_ok"] = cmp.ordering_ok;
  j["ordering_notes"] = cmp.ordering_notes;
  for (const auto& row : cmp.rows) {
    nlohmann::json r;
    r["available"] = row.available;
    r["status"] = status_name(row.status);
    r["objective"] = row.objective;
    r["seconds"] = row.seconds;
    r["exact"] = row.recovery.exact;
    r["eig_ratio"] = row.recovery.eig_ratio;
    r["cycle_residual"] = row.recovery.cycle_residual;
    if (!row.note.empty()) r["note"] = row.note;
    j[relaxation_name(row.kind)] = r;
  }
  return j.dump();
}

std::string chordal_info_text(const std::string& case_name) {
  const CaseData data = load_case(case_name);
  return chordal_info_json(case_name, chordal_info(Graph::from_network(data.network))).dump();
}

std::vector<std::pair<double, double>> to_pairs(const std::vector<Point2>& pts) {
  std::vector<std::pair<double, double>> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.emplace_back(p.x, p.y);
  return out;
}

std::vector<std::pair<double, double>> project(const std::string& set, const std::string& plane, int directions,
                                               int grid) {
  const Network net = three_bus_network();
  ProjectionSpec spec;
  spec.plane = parse_plane(plane);
  spec.directions = directions;
  spec.grid = grid;
  if (set == "r1" || set == "r2") {
    std::vector<Point2> pts;
    for (const auto& sp : project_convex(net, spec, parse_relaxation(set))) pts.push_back(sp.point);
    return to_pairs(pts);
  }
  if (set == "nonconvex") return to_pairs(project_nonconvex(net, spec));
  if (set == "w2nc") return to_pairs(project_W2nc(net, spec));
  throw ModelError("unknown set '" + set + "' (r1 | r2 | nonconvex | w2nc)");
}

}  // namespace

PYBIND11_MODULE(_opfrelax, m) {
  m.doc() = "Conic relaxations of optimal power flow";
  // translators run most recent first, so the base class goes first
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  m.def("bundled_case_names", &bundled_case_names);
  m.def("solve_json", &solve_json, py::arg("case"), py::arg("relaxation") = "r1",
        py::call_guard<py::gil_scoped_release>());
  m.def("compare_json", &compare_json, py::arg("case"), py::arg("parallel") = true,
        py::call_guard<py::gil_scoped_release>());
  m.def("chordal_info_json", &chordal_info_text, py::arg("case"));
  m.def("project", &project, py::arg("set"), py::arg("plane") = "p1p2", py::arg("directions") = 16,
        py::arg("grid") = 256, py::call_guard<py::gil_scoped_release>());
}
