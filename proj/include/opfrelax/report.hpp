#pragma once

#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "opfrelax/cases.hpp"
#include "opfrelax/conic.hpp"
#include "opfrelax/projection.hpp"
#include "opfrelax/recovery.hpp"
#include "opfrelax/relaxations.hpp"

namespace opfrelax {

struct SolveOutcome {
  RelaxationKind kind = RelaxationKind::R1;
  ConicProgram program;
  ConicSolution solution;
  RecoveryReport recovery;
  std::optional<ChordalExtension> extension;  // Rch only
};

/// Builds, solves and runs the matching recovery on one relaxation.
SolveOutcome solve_case(const Network& net, const CostSpec& cost, RelaxationKind kind,
                        const SolverSettings& settings = {}, const RecoveryThresholds& thresholds = {});

/// Recovery for a solution vector of the program built for (net, cost, kind).
RecoveryReport recover_solution(const Network& net, const ConicProgram& prog, RelaxationKind kind,
                                const Eigen::VectorXd& x, const RecoveryThresholds& thresholds = {});

/// JSON report of a solve; carries enough ("case", "relaxation", "x") for a
/// later recovery run.
nlohmann::json solve_report(const std::string& case_name, const SolveOutcome& out);

struct ChordalInfo {
  int n = 0;
  int edges = 0;
  int fill_edges = 0;
  int cliques = 0;
  int max_clique = 0;
  std::map<int, int> clique_histogram;  // size -> count
};

ChordalInfo chordal_info(const Graph& g);
nlohmann::json chordal_info_json(const std::string& case_name, const ChordalInfo& info);

/// gnuplot script plotting the CSV files written by the projection command.
std::string gnuplot_script(Plane plane, const std::vector<std::string>& csv_files);

}  // namespace opfrelax
