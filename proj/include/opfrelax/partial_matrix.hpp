#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "opfrelax/graph.hpp"
#include "opfrelax/types.hpp"

namespace opfrelax {

/// Dense Hermitian matrix; construction symmetrizes the input.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(int n) : a_(Eigen::MatrixXcd::Zero(n, n)) {}
  explicit HermitianMatrix(Eigen::MatrixXcd a);

  /// Keeps the entries verbatim (caller guarantees Hermitian symmetry).
  static HermitianMatrix adopt(Eigen::MatrixXcd a);
  static HermitianMatrix outer(std::span<const Complex> v);
  static HermitianMatrix identity(int n);

  int n() const { return static_cast<int>(a_.rows()); }
  Complex operator()(int j, int k) const { return a_(j, k); }
  /// Sets (j,k) and its mirror (k,j).
  void set(int j, int k, Complex value);
  const Eigen::MatrixXcd& dense() const { return a_; }

  /// Eigenvalues in ascending order.
  Eigen::VectorXd eigenvalues() const;

 private:
  Eigen::MatrixXcd a_;
};

/// Values on I_G = {(j,j)} u {(j,k),(k,j) : {j,k} in E}.
class GPartialMatrix {
 public:
  GPartialMatrix() = default;
  explicit GPartialMatrix(Graph g);

  const Graph& graph() const { return graph_; }
  int n() const { return graph_.n(); }

  Complex diag(int j) const { return diag_[j]; }
  void set_diag(int j, Complex value) { diag_[j] = value; }

  /// Entry (j,k) for j == k or an edge {j,k}; throws otherwise.
  Complex at(int j, int k) const;
  /// Sets only (j,k).
  void set(int j, int k, Complex value);
  /// Sets (j,k) and (k,j) = conj(value).
  void set_hermitian(int j, int k, Complex value);

  bool is_hermitian(double tol = 0.0) const;
  /// Largest |diagonal| entry; the scale that relative tolerances refer to.
  double scale() const;

  /// Dense submatrix on a clique (all pairs must be stored).
  Eigen::MatrixXcd submatrix(const Clique& c) const;

  /// Same values restricted to a subgraph of this pattern.
  GPartialMatrix restrict_to(const Graph& sub) const;

 private:
  int edge_slot(int j, int k) const;

  Graph graph_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<Complex> diag_;
  std::vector<Complex> upper_;  // (u,v) with u < v, per edge
  std::vector<Complex> lower_;  // (v,u)
};

GPartialMatrix from_full(const HermitianMatrix& W, const Graph& g);

/// Every clique submatrix has min eigenvalue >= -tol * scale.
bool is_psd_partial(const GPartialMatrix& Wg, const std::vector<Clique>& cliques, double tol);

/// Every clique submatrix has sigma2/sigma1 <= tol and sigma1 > 0.
bool is_rank1_partial(const GPartialMatrix& Wg, const std::vector<Clique>& cliques, double tol);

/// Largest sigma2/sigma1 over the given cliques (0 for an all-zero block).
double max_rank1_deviation(const GPartialMatrix& Wg, const std::vector<Clique>& cliques);

/// Max over cycles of |wrap(sum of stored angles along the cycle)|.
double cycle_residual(const GPartialMatrix& Wg, const std::vector<Cycle>& cycles);

/// Edges of the pattern as 2-node cliques.
std::vector<Clique> edge_cliques(const Graph& g);

/// Rank-one completion by BFS angle propagation from node 0.
HermitianMatrix rank1_complete(const GPartialMatrix& Wg, double tol);

/// The voltage vector behind rank1_complete (V_0 real and nonnegative).
std::vector<Complex> rank1_voltages(const GPartialMatrix& Wg, double tol);

/// PSD completion of a PSD partial matrix on a chordal pattern; stored entries
/// are copied unchanged, missing ones filled by the maximum-determinant rule.
HermitianMatrix chordal_psd_complete(const GPartialMatrix& Wch, double tol);

void to_json(nlohmann::json& j, const GPartialMatrix& Wg);

}  // namespace opfrelax
