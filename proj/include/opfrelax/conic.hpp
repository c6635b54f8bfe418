#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <nlohmann/json_fwd.hpp>

#include "opfrelax/types.hpp"

namespace opfrelax {

enum class ConeKind { Nonneg, SecondOrder, RotatedSecondOrder, PsdReal };

/// A block of consecutive cone rows. For PsdReal, dim is the matrix order k
/// and the block spans k(k+1)/2 rows in svec layout: lower triangle, column
/// by column, off-diagonal entries scaled by sqrt(2). RotatedSecondOrder
/// (a, b, u) means 2ab >= |u|^2, a, b >= 0.
struct ConeBlock {
  ConeKind kind = ConeKind::Nonneg;
  int dim = 0;

  int rows() const { return kind == ConeKind::PsdReal ? dim * (dim + 1) / 2 : dim; }
};

const char* cone_name(ConeKind kind);

/// svec position of entry (i, j), i >= j, of an order-k symmetric matrix.
inline int svec_index(int k, int i, int j) { return j * k - j * (j - 1) / 2 + (i - j); }

enum class SymbolKind { WDiag, WRe, WIm, SRe, SIm, Ell, V, Epigraph };

/// Model quantity behind a program variable. W entries use (i, j) with i <= j;
/// branch-flow quantities use i = line index (or bus index for V).
struct Symbol {
  SymbolKind kind = SymbolKind::WDiag;
  int i = 0;
  int j = 0;

  bool operator==(const Symbol&) const = default;
  auto operator<=>(const Symbol&) const = default;
};

std::string to_string(const Symbol& s);

class SymbolTable {
 public:
  int add(const Symbol& s);
  /// Variable index or -1.
  int find(const Symbol& s) const;
  const Symbol& symbol(int var) const { return symbols_[var]; }
  int size() const { return static_cast<int>(symbols_.size()); }

 private:
  std::vector<Symbol> symbols_;
  std::vector<std::pair<Symbol, int>> sorted_;
};

/// sum_k coef_k x_{var_k} + constant.
struct LinearExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  void add(int var, double coef) {
    if (coef != 0.0) terms.emplace_back(var, coef);
  }
  LinearExpr& operator+=(const LinearExpr& other);
  LinearExpr scaled(double a) const;
  /// Merges repeated variables and sorts by index.
  void compress();
  double evaluate(const Eigen::VectorXd& x) const;
};

/// min c'x + offset  s.t.  A x = b,  G x + s = h,  s in K (cones in row order).
struct ConicProgram {
  int num_vars = 0;
  Eigen::VectorXd c;
  double offset = 0.0;
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  Eigen::SparseMatrix<double> G;
  Eigen::VectorXd h;
  std::vector<ConeBlock> cones;
  SymbolTable labels;

  int cone_rows() const;
  int count(ConeKind kind) const;
  /// Throws ModelError on inconsistent dimensions.
  void validate() const;
};

/// Accumulates a ConicProgram row by row.
class ProgramBuilder {
 public:
  int add_variable(const Symbol& s);
  int variable(const Symbol& s) const;
  const SymbolTable& labels() const { return labels_; }

  void add_objective(const LinearExpr& e);
  void add_equality(const LinearExpr& e);  // e == 0
  /// Each expression becomes one row of the cone block: expr(x) in K.
  void add_cone(ConeKind kind, int dim, const std::vector<LinearExpr>& rows);
  /// lo <= e <= hi; equal bounds give an equality, infinite sides are skipped.
  void add_range(const LinearExpr& e, double lo, double hi);

  ConicProgram build() const;

 private:
  SymbolTable labels_;
  LinearExpr objective_;
  std::vector<LinearExpr> equalities_;
  std::vector<LinearExpr> cone_rows_;
  std::vector<ConeBlock> cones_;
};

struct SolverSettings {
  double tol_gap = 1e-8;
  double tol_feas = 1e-8;
  int max_iters = 200;
  double step_fraction = 0.99;
  bool keep_log = true;

  void validate() const;
};

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, IterLimit, NumericalFailure };

const char* status_name(SolveStatus s);

struct IterationInfo {
  int iter = 0;
  double pcost = 0.0;
  double dcost = 0.0;
  double gap = 0.0;
  double pres = 0.0;
  double dres = 0.0;
  double tau = 0.0;
  double kappa = 0.0;
  double step = 0.0;
  double sigma = 0.0;
};

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
};

/// For Optimal, (x, y, z, s) are the primal-dual optimum; for the infeasible
/// statuses they hold the normalised certificate.
struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x;
  Eigen::VectorXd y;  // equality multipliers
  Eigen::VectorXd z;  // cone multipliers
  Eigen::VectorXd s;  // cone slacks h - G x
  double objective = 0.0;       // c'x + offset
  double dual_objective = 0.0;  // -b'y - h'z + offset
  Residuals residuals;
  int iterations = 0;
  double tau = 0.0;
  double kappa = 0.0;
  double seconds = 0.0;
  std::string message;
  std::vector<IterationInfo> log;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

ConicSolution solve(const ConicProgram& prog, const SolverSettings& settings = {});

struct CertificateReport {
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  double primal_cone_violation = 0.0;
  double dual_cone_violation = 0.0;
  double worst = 0.0;
  bool ok = false;
};

/// Independent re-check of an Optimal solution: residuals recomputed from
/// (x, y, z) alone, slack recomputed as h - Gx, cone membership of slack and
/// multipliers checked. Throws Error when the status is not Optimal.
CertificateReport certify(const ConicProgram& prog, const ConicSolution& sol, double tol);

/// Largest violation of membership in the cone for one block's rows.
double cone_violation(const ConeBlock& block, const Eigen::Ref<const Eigen::VectorXd>& v);

void to_json(nlohmann::json& j, const ConicProgram& prog);
void from_json(const nlohmann::json& j, ConicProgram& prog);
void to_json(nlohmann::json& j, const ConicSolution& sol);

}  // namespace opfrelax
