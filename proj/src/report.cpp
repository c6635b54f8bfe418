#include "opfrelax/report.hpp"

#include <sstream>

namespace opfrelax {

RecoveryReport recover_solution(const Network& net, const ConicProgram& prog, RelaxationKind kind,
                                const Eigen::VectorXd& x, const RecoveryThresholds& th) {
  switch (kind) {
    case RelaxationKind::R1:
      return recover_from_full(extract_full(prog, x, net.n()), th.eig_ratio);
    case RelaxationKind::Rch: {
      const GPartialMatrix Wch = extract_partial(prog, x, net.n());
      return recover_from_chordal(Wch, maximal_cliques_from_peo(Wch.graph(), mcs_order(Wch.graph())),
                                  th.eig_ratio);
    }
    case RelaxationKind::R2:
      return recover_from_partial(extract_partial(prog, x, net.n()), std::max(th.eig_ratio, th.cycle));
    case RelaxationKind::BF:
      return recover_bf(extract_bf(prog, x, net), net, th.soc, th.cycle);
  }
  throw ModelError("unknown relaxation");
}

SolveOutcome solve_case(const Network& net, const CostSpec& cost, RelaxationKind kind, const SolverSettings& settings,
                        const RecoveryThresholds& thresholds) {
  SolveOutcome out;
  out.kind = kind;
  if (kind == RelaxationKind::Rch) {
    out.extension = chordal_extend(Graph::from_network(net));
    out.program = build_Rch(net, cost, *out.extension);
  } else {
    out.program = build_relaxation(kind, net, cost);
  }
  out.solution = solve(out.program, settings);
  if (out.solution.status != SolveStatus::Optimal) return out;
  try {
    out.recovery = recover_solution(net, out.program, kind, out.solution.x, thresholds);
  } catch (const CompletionError& e) {
    out.recovery.diagnostics.push_back(e.what());
  }
  if (out.recovery.V) {
    auto& prof = *out.recovery.V;
    if (prof.I.empty()) prof = make_profile(net, prof.V);
    const double c = evaluate_cost(net, cost, prof.V);
    out.recovery.objective_gap_note =
        std::abs(c - out.solution.objective) / (1.0 + std::abs(out.solution.objective));
  }
  return out;
}

nlohmann::json solve_report(const std::string& case_name, const SolveOutcome& out) {
  nlohmann::json j;
  j["case"] = case_name;
  j["relaxation"] = relaxation_name(out.kind);
  j["status"] = status_name(out.solution.status);
  j["objective"] = out.solution.objective;
  j["dual_objective"] = out.solution.dual_objective;
  j["iterations"] = out.solution.iterations;
  j["seconds"] = out.solution.seconds;
  j["variables"] = out.program.num_vars;
  j["cone_rows"] = out.program.cone_rows();
  j["recovery"] = out.recovery;
  j["x"] = std::vector<double>(out.solution.x.data(), out.solution.x.data() + out.solution.x.size());
  if (out.extension) {
    j["fill_edges"] = out.extension->fill_edges.size();
    j["cliques"] = out.extension->maximal_cliques.size();
  }
  return j;
}

ChordalInfo chordal_info(const Graph& g) {
  const ChordalExtension ext = chordal_extend(g);
  ChordalInfo info;
  info.n = g.n();
  info.edges = g.m();
  info.fill_edges = static_cast<int>(ext.fill_edges.size());
  info.cliques = static_cast<int>(ext.maximal_cliques.size());
  for (const auto& c : ext.maximal_cliques) {
    const int k = static_cast<int>(c.size());
    info.max_clique = std::max(info.max_clique, k);
    ++info.clique_histogram[k];
  }
  return info;
}

nlohmann::json chordal_info_json(const std::string& case_name, const ChordalInfo& info) {
  nlohmann::json hist = nlohmann::json::object();
  for (auto [size, count] : info.clique_histogram) hist[std::to_string(size)] = count;
  return {{"case", case_name},         {"buses", info.n},        {"edges", info.edges},
          {"fill_edges", info.fill_edges}, {"cliques", info.cliques}, {"max_clique", info.max_clique},
          {"clique_histogram", hist}};
}

std::string gnuplot_script(Plane plane, const std::vector<std::string>& csv_files) {
  const char* ax = plane == Plane::P1P2 ? "p" : "q";
  std::ostringstream os;
  os << "set datafile separator ','\n";
  os << "set key outside\n";
  os << "set xlabel '" << ax << "1'\nset ylabel '" << ax << "2'\n";
  os << "plot ";
  for (size_t k = 0; k < csv_files.size(); ++k) {
    const bool sweep = csv_files[k].find("sweep") != std::string::npos;
    os << (k ? ", \\\n     " : "") << "'" << csv_files[k] << "' every ::1 using " << (sweep ? "2:3" : "1:2")
       << " with " << (sweep ? "linespoints" : "dots") << " title '" << csv_files[k] << "'";
  }
  os << "\n";
  return os.str();
}

}  // namespace opfrelax
