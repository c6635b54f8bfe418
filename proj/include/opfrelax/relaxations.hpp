#pragma once

#include <string>
#include <vector>

#include "opfrelax/conic.hpp"
#include "opfrelax/graph.hpp"
#include "opfrelax/network.hpp"
#include "opfrelax/partial_matrix.hpp"

namespace opfrelax {

/// coef * W(row, col)
struct InjectionTerm {
  int row = 0;
  int col = 0;
  Complex coef;
};

/// s_j(W) = sum of the terms of bus j; support is the diagonal plus line entries.
struct InjectionMap {
  std::vector<std::vector<InjectionTerm>> terms;

  int n() const { return static_cast<int>(terms.size()); }
  Complex evaluate(int j, const HermitianMatrix& W) const;
  Complex evaluate(int j, const GPartialMatrix& Wg) const;
};

InjectionMap build_injection_map(const Network& net);

enum class RelaxationKind { R1, Rch, R2, BF };

const char* relaxation_name(RelaxationKind k);
RelaxationKind parse_relaxation(const std::string& name);

/// Linear objective (constant carried in linear.constant) plus convex
/// quadratic terms q * expr^2 that builders turn into epigraph cones.
struct CostFunctional {
  LinearExpr linear;
  std::vector<std::pair<LinearExpr, double>> quadratic;
};

/// Objective over the injection expressions p_j, q_j of a program.
CostFunctional build_cost(const Network& net, const CostSpec& cost, const std::vector<LinearExpr>& p,
                          const std::vector<LinearExpr>& q);

inline constexpr int kDefaultR1Cap = 60;

ConicProgram build_R1(const Network& net, const CostSpec& cost, int cap = kDefaultR1Cap);
ConicProgram build_Rch(const Network& net, const CostSpec& cost, const ChordalExtension& ext);
ConicProgram build_R2(const Network& net, const CostSpec& cost);
ConicProgram build_BF(const Network& net, const CostSpec& cost);

ConicProgram build_relaxation(RelaxationKind kind, const Network& net, const CostSpec& cost);

/// Pattern of the W variables of a W-space program (edges carrying WRe/WIm).
Graph pattern_from_labels(const ConicProgram& prog, int n);

/// W-space values of a solution on the program's own pattern.
GPartialMatrix extract_partial(const ConicProgram& prog, const Eigen::VectorXd& x, int n);

/// Full W from an R1 solution (every pair must carry a variable).
HermitianMatrix extract_full(const ConicProgram& prog, const Eigen::VectorXd& x, int n);

}  // namespace opfrelax
