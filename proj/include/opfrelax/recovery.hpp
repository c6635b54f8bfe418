#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "opfrelax/conic.hpp"
#include "opfrelax/network.hpp"
#include "opfrelax/partial_matrix.hpp"
#include "opfrelax/relaxations.hpp"

namespace opfrelax {

/// (S, ell, v) with S the sending-end power of each line in its stored
/// orientation, ell the squared series current, v the squared magnitudes.
struct BranchFlowPoint {
  std::vector<Complex> S;
  std::vector<double> ell;
  std::vector<double> v;
};

struct VoltageProfile {
  std::vector<Complex> V;
  std::vector<Complex> I;  // series current per line, I = y (V_from - V_to)
  std::vector<Complex> S;  // S = V_from conj(I)
};

/// Voltages plus the derived line currents and flows.
VoltageProfile make_profile(const Network& net, std::span<const Complex> V);

struct RecoveryReport {
  // Full W: lambda2/lambda1. Partial W: worst over edges or cliques.
  // Branch flow: worst relative slack of ell v - |S|^2.
  double eig_ratio = 0.0;
  double cycle_residual = 0.0;
  bool exact = false;
  std::optional<VoltageProfile> V;
  // |cost(V) - solver objective| / (1 + |objective|) when filled by a caller.
  double objective_gap_note = 0.0;
  std::vector<std::string> diagnostics;
};

struct RecoveryThresholds {
  double eig_ratio = 1e-5;
  double cycle = 1e-5;  // radians
  double soc = 1e-6;    // relative
};

GPartialMatrix f_map(std::span<const Complex> V, const Graph& g);
BranchFlowPoint g_map(const GPartialMatrix& Wg, const Network& net);
GPartialMatrix g_inv(const BranchFlowPoint& x, const Network& net);

RecoveryReport recover_from_full(const HermitianMatrix& W, double tol = 1e-5);
/// R2-style partial matrix: edge rank-one deviations and cycle residual.
RecoveryReport recover_from_partial(const GPartialMatrix& Wg, double tol = 1e-5);
/// Chordal partial matrix: rank one on every maximal clique.
RecoveryReport recover_from_chordal(const GPartialMatrix& Wch, const std::vector<Clique>& cliques,
                                    double tol = 1e-5);
RecoveryReport recover_bf(const BranchFlowPoint& x, const Network& net, double soc_tol = 1e-6,
                          double cycle_tol = 1e-5);

/// Edge-wise PSD and rank one, cycle condition not required.
bool in_W2nc(const GPartialMatrix& Wg, double tol);

BranchFlowPoint extract_bf(const ConicProgram& prog, const Eigen::VectorXd& x, const Network& net);

struct ComparisonRow {
  RelaxationKind kind = RelaxationKind::R1;
  bool available = false;
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;
  double seconds = 0.0;
  int iterations = 0;
  RecoveryReport recovery;
  std::string note;
};

struct Comparison {
  std::vector<ComparisonRow> rows;  // r1, rch, r2, bf
  bool ordering_ok = false;
  std::vector<std::string> ordering_notes;

  const ComparisonRow& row(RelaxationKind k) const;
};

struct CompareOptions {
  SolverSettings settings;
  RecoveryThresholds thresholds;
  int r1_cap = kDefaultR1Cap;
  bool parallel = true;
  // Relative slack allowed in r1 = rch and r2 <= r1.
  double ordering_tol = 1e-6;
};

Comparison compare_relaxations(const Network& net, const CostSpec& cost, const CompareOptions& options = {});

/// One CSV line per comparison (see comparison_csv_header()).
std::string comparison_csv_header();
std::string comparison_csv_row(const std::string& name, const Comparison& cmp);

void to_json(nlohmann::json& j, const RecoveryReport& r);
void to_json(nlohmann::json& j, const BranchFlowPoint& x);
void from_json(const nlohmann::json& j, BranchFlowPoint& x);

}  // namespace opfrelax
