#include "opfrelax/partial_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace opfrelax {

HermitianMatrix::HermitianMatrix(Eigen::MatrixXcd a) {
  if (a.rows() != a.cols()) throw ModelError("Hermitian matrix must be square");
  a_ = 0.5 * (a + a.adjoint());
}

HermitianMatrix HermitianMatrix::adopt(Eigen::MatrixXcd a) {
  if (a.rows() != a.cols()) throw ModelError("Hermitian matrix must be square");
  HermitianMatrix h;
  h.a_ = std::move(a);
  return h;
}

HermitianMatrix HermitianMatrix::outer(std::span<const Complex> v) {
  const int n = static_cast<int>(v.size());
  Eigen::MatrixXcd a(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) a(j, k) = v[j] * std::conj(v[k]);
  return adopt(std::move(a));
}

HermitianMatrix HermitianMatrix::identity(int n) {
  return adopt(Eigen::MatrixXcd::Identity(n, n));
}

void HermitianMatrix::set(int j, int k, Complex value) {
  a_(j, k) = value;
  a_(k, j) = std::conj(value);
}

Eigen::VectorXd HermitianMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

GPartialMatrix::GPartialMatrix(Graph g)
    : graph_(std::move(g)),
      edges_(graph_.edges()),
      diag_(graph_.n(), Complex(0.0, 0.0)),
      upper_(edges_.size(), Complex(0.0, 0.0)),
      lower_(edges_.size(), Complex(0.0, 0.0)) {}

int GPartialMatrix::edge_slot(int j, int k) const {
  const std::pair<int, int> key{std::min(j, k), std::max(j, k)};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key)
    throw ModelError("entry (" + std::to_string(j) + "," + std::to_string(k) +
                     ") is not in the index set of the pattern");
  return static_cast<int>(it - edges_.begin());
}

Complex GPartialMatrix::at(int j, int k) const {
  if (j == k) return diag_[j];
  const int e = edge_slot(j, k);
  return j < k ? upper_[e] : lower_[e];
}

void GPartialMatrix::set(int j, int k, Complex value) {
  if (j == k) {
    diag_[j] = value;
    return;
  }
  const int e = edge_slot(j, k);
  (j < k ? upper_[e] : lower_[e]) = value;
}

void GPartialMatrix::set_hermitian(int j, int k, Complex value) {
  set(j, k, value);
  if (j != k) {
    set(k, j, std::conj(value));
  } else {
    diag_[j] = Complex(value.real(), 0.0);
  }
}

bool GPartialMatrix::is_hermitian(double tol) const {
  const double s = std::max(scale(), 1.0);
  for (const auto& d : diag_)
    if (std::abs(d.imag()) > tol * s) return false;
  for (std::size_t e = 0; e < edges_.size(); ++e)
    if (std::abs(lower_[e] - std::conj(upper_[e])) > tol * s) return false;
  return true;
}

double GPartialMatrix::scale() const {
  double s = 0.0;
  for (const auto& d : diag_) s = std::max(s, std::abs(d));
  return s;
}

Eigen::MatrixXcd GPartialMatrix::submatrix(const Clique& c) const {
  const int k = static_cast<int>(c.size());
  Eigen::MatrixXcd m(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) m(a, b) = at(c[a], c[b]);
  return m;
}

GPartialMatrix GPartialMatrix::restrict_to(const Graph& sub) const {
  GPartialMatrix out(sub);
  for (int j = 0; j < n(); ++j) out.set_diag(j, diag_[j]);
  for (auto [u, v] : sub.edges()) {
    out.set(u, v, at(u, v));
    out.set(v, u, at(v, u));
  }
  return out;
}

GPartialMatrix from_full(const HermitianMatrix& W, const Graph& g) {
  if (W.n() != g.n()) throw ModelError("matrix and graph dimensions differ");
  GPartialMatrix out(g);
  for (int j = 0; j < g.n(); ++j) out.set_diag(j, W(j, j));
  for (auto [u, v] : g.edges()) {
    out.set(u, v, W(u, v));
    out.set(v, u, W(v, u));
  }
  return out;
}

std::vector<Clique> edge_cliques(const Graph& g) {
  std::vector<Clique> out;
  for (auto [u, v] : g.edges()) out.push_back({u, v});
  return out;
}

namespace {

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

double min_eigenvalue(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double sigma_ratio(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() < 2) return 0.0;
  if (s(0) <= 0.0) return 0.0;
  return s(1) / s(0);
}

double angle_or_zero(Complex w) { return w == Complex(0.0, 0.0) ? 0.0 : std::arg(w); }

std::string describe(const Cycle& c) {
  std::ostringstream os;
  os << "(";
  for (std::size_t k = 0; k < c.size(); ++k) os << (k ? "," : "") << c[k];
  os << ")";
  return os.str();
}

double cycle_sum(const GPartialMatrix& Wg, const Cycle& c, bool allow_zero) {
  double sum = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const int a = c[k];
    const int b = c[(k + 1) % c.size()];
    const Complex w = Wg.at(a, b);
    if (w == Complex(0.0, 0.0) && !allow_zero)
      throw CompletionError("zero off-diagonal entry on cycle edge (" + std::to_string(a) + "," +
                            std::to_string(b) + "): angle undefined");
    sum += angle_or_zero(w);
  }
  return wrap_angle(sum);
}

}  // namespace

bool is_psd_partial(const GPartialMatrix& Wg, const std::vector<Clique>& cliques, double tol) {
  const double s = Wg.scale();
  for (const auto& c : cliques)
    if (min_eigenvalue(Wg.submatrix(c)) < -tol * s) return false;
  return true;
}

double max_rank1_deviation(const GPartialMatrix& Wg, const std::vector<Clique>& cliques) {
  double worst = 0.0;
  for (const auto& c : cliques) worst = std::max(worst, sigma_ratio(Wg.submatrix(c)));
  return worst;
}

bool is_rank1_partial(const GPartialMatrix& Wg, const std::vector<Clique>& cliques, double tol) {
  for (const auto& c : cliques) {
    const Eigen::MatrixXcd m = Wg.submatrix(c);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    const auto& sv = svd.singularValues();
    if (!(sv(0) > 0.0)) return false;
    if (sv.size() > 1 && sv(1) / sv(0) > tol) return false;
  }
  return true;
}

double cycle_residual(const GPartialMatrix& Wg, const std::vector<Cycle>& cycles) {
  double worst = 0.0;
  for (const auto& c : cycles) worst = std::max(worst, std::abs(cycle_sum(Wg, c, false)));
  return worst;
}

std::vector<Complex> rank1_voltages(const GPartialMatrix& Wg, double tol) {
  const Graph& g = Wg.graph();
  const int n = g.n();
  const double s = Wg.scale();
  std::vector<Complex> V(n, Complex(0.0, 0.0));
  if (s == 0.0) return V;
  const double zero = tol * s;

  for (int j = 0; j < n; ++j) {
    const Complex d = Wg.diag(j);
    if (d.real() < -zero || std::abs(d.imag()) > zero)
      throw CompletionError("diagonal entry " + std::to_string(j) + " is not a nonnegative real");
  }
  for (auto [u, v] : g.edges()) {
    const Complex wuv = Wg.at(u, v);
    const Complex wvu = Wg.at(v, u);
    const std::string edge = "(" + std::to_string(u) + "," + std::to_string(v) + ")";
    if (std::abs(wvu - std::conj(wuv)) > zero)
      throw CompletionError("edge " + edge + " is not Hermitian");
    const double du = Wg.diag(u).real(), dv = Wg.diag(v).real();
    if (du <= zero || dv <= zero) {
      if (std::abs(wuv) > std::sqrt(zero * s))
        throw CompletionError("edge " + edge + " has a zero diagonal with nonzero off-diagonal");
      continue;
    }
    Eigen::Matrix2cd m;
    m << du, wuv, wvu, dv;
    if (min_eigenvalue(m) < -zero) throw CompletionError("edge " + edge + " is not PSD");
    if (sigma_ratio(m) > tol) throw CompletionError("edge " + edge + " is not rank one");
  }
  for (const auto& c : fundamental_cycles(g)) {
    const double r = std::abs(cycle_sum(Wg, c, true));
    if (r > tol)
      throw CompletionError("cycle condition violated on cycle " + describe(c) +
                            " (residual " + std::to_string(r) + ")");
  }

  const SpanningTree tree = bfs_tree(g, 0);
  std::vector<double> theta(n, 0.0);
  for (int v : tree.order) {
    const int p = tree.parent[v];
    if (p >= 0) theta[v] = theta[p] - angle_or_zero(Wg.at(p, v));
  }
  for (int j = 0; j < n; ++j)
    V[j] = std::polar(std::sqrt(std::max(Wg.diag(j).real(), 0.0)), theta[j]);
  return V;
}

HermitianMatrix rank1_complete(const GPartialMatrix& Wg, double tol) {
  const auto V = rank1_voltages(Wg, tol);
  return HermitianMatrix::outer(V);
}

HermitianMatrix chordal_psd_complete(const GPartialMatrix& Wch, double tol) {
  const Graph& g = Wch.graph();
  const int n = g.n();
  const std::vector<int> peo = mcs_order(g);
  if (!is_perfect_elimination_ordering(g, peo))
    throw CompletionError("non-chordal pattern: no perfect elimination ordering");
  const auto cliques = maximal_cliques_from_peo(g, peo);
  if (!is_psd_partial(Wch, cliques, tol)) throw CompletionError("clique PSD violation");

  Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < n; ++j) W(j, j) = Wch.diag(j);
  for (auto [u, v] : g.edges()) {
    W(u, v) = Wch.at(u, v);
    W(v, u) = Wch.at(v, u);
  }

  std::vector<int> pos(n);
  for (int k = 0; k < n; ++k) pos[peo[k]] = k;
  for (int k = n - 1; k >= 0; --k) {
    const int v = peo[k];
    std::vector<int> S;
    for (int w : g.neighbors(v))
      if (pos[w] > k) S.push_back(w);
    std::vector<int> missing;
    for (int kk = k + 1; kk < n; ++kk) {
      const int u = peo[kk];
      if (!g.has_edge(v, u)) missing.push_back(u);
    }
    if (missing.empty()) continue;
    if (S.empty()) continue;  // disconnected from later nodes: zero fill
    const int s = static_cast<int>(S.size());
    Eigen::MatrixXcd Wss(s, s);
    Eigen::RowVectorXcd Wvs(s);
    for (int a = 0; a < s; ++a) {
      Wvs(a) = W(v, S[a]);
      for (int b = 0; b < s; ++b) Wss(a, b) = W(S[a], S[b]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian_part(Wss));
    const auto& lam = es.eigenvalues();
    const double cutoff = std::max(lam.maxCoeff(), 0.0) * 1e-12;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s);
    for (int a = 0; a < s; ++a)
      if (lam(a) > cutoff) inv(a) = 1.0 / lam(a);
    const Eigen::MatrixXcd pinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().adjoint();
    const Eigen::RowVectorXcd row = Wvs * pinv;
    for (int u : missing) {
      Complex value(0.0, 0.0);
      for (int a = 0; a < s; ++a) value += row(a) * W(S[a], u);
      W(v, u) = value;
      W(u, v) = std::conj(value);
    }
  }
  return HermitianMatrix::adopt(std::move(W));
}

void to_json(nlohmann::json& j, const GPartialMatrix& Wg) {
  j = nlohmann::json::object();
  j["n"] = Wg.n();
  auto diag = nlohmann::json::array();
  for (int k = 0; k < Wg.n(); ++k) diag.push_back({Wg.diag(k).real(), Wg.diag(k).imag()});
  j["diag"] = diag;
  auto entries = nlohmann::json::array();
  for (auto [u, v] : Wg.graph().edges()) {
    const Complex w = Wg.at(u, v);
    entries.push_back({{"j", u}, {"k", v}, {"value", {w.real(), w.imag()}}});
  }
  j["offdiag"] = entries;
}

}  // namespace opfrelax
