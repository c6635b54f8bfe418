#include "opfrelax/recovery.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace opfrelax {

namespace {

double angle_or_zero(Complex z) { return z == Complex(0.0, 0.0) ? 0.0 : std::arg(z); }

// Rotates V so that the first bus with nonzero voltage has angle 0.
void normalize_phase(std::vector<Complex>& V) {
  for (const Complex& v : V) {
    if (std::abs(v) > 0.0) {
      const Complex rot = std::conj(v) / std::abs(v);
      for (Complex& w : V) w *= rot;
      return;
    }
  }
}

// BFS angle propagation without any checks.
std::vector<Complex> propagate(const GPartialMatrix& Wg) {
  const int n = Wg.n();
  const SpanningTree tree = bfs_tree(Wg.graph(), 0);
  std::vector<double> theta(n, 0.0);
  for (int v : tree.order) {
    const int p = tree.parent[v];
    if (p >= 0) theta[v] = theta[p] - angle_or_zero(Wg.at(p, v));
  }
  std::vector<Complex> V(n);
  for (int j = 0; j < n; ++j) V[j] = std::polar(std::sqrt(std::max(Wg.diag(j).real(), 0.0)), theta[j]);
  return V;
}

// Cycle residual that tolerates zero entries (angle 0, the edge decouples).
double safe_cycle_residual(const GPartialMatrix& Wg) {
  double worst = 0.0;
  for (const auto& c : fundamental_cycles(Wg.graph())) {
    double sum = 0.0;
    for (size_t a = 0; a < c.size(); ++a) sum += angle_or_zero(Wg.at(c[a], c[(a + 1) % c.size()]));
    worst = std::max(worst, std::abs(wrap_angle(sum)));
  }
  return worst;
}

double clique_ratio(const Eigen::MatrixXcd& block) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const int k = static_cast<int>(ev.size());
  if (k < 2) return 0.0;
  const double l1 = ev(k - 1);
  if (l1 <= 0.0) return 0.0;
  const double r = std::max(ev(k - 2), 0.0) / l1;
  // Below the eigensolver's resolution the ratio is indistinguishable from 0.
  return r <= 4.0 * k * std::numeric_limits<double>::epsilon() ? 0.0 : r;
}

void fill_voltages(RecoveryReport& rep, const std::vector<Complex>& V) {
  VoltageProfile prof;
  prof.V = V;
  rep.V = std::move(prof);
}

}  // namespace

VoltageProfile make_profile(const Network& net, std::span<const Complex> V) {
  if (static_cast<int>(V.size()) != net.n()) throw ModelError("voltage vector length differs from bus count");
  VoltageProfile prof;
  prof.V.assign(V.begin(), V.end());
  for (const Line& line : net.lines) {
    const Complex I = line.y * (V[line.from] - V[line.to]);
    prof.I.push_back(I);
    prof.S.push_back(V[line.from] * std::conj(I));
  }
  return prof;
}

GPartialMatrix f_map(std::span<const Complex> V, const Graph& g) {
  if (static_cast<int>(V.size()) != g.n()) throw ModelError("voltage vector length differs from node count");
  GPartialMatrix Wg(g);
  for (int j = 0; j < g.n(); ++j) Wg.set_diag(j, Complex(std::norm(V[j]), 0.0));
  for (auto [u, v] : g.edges()) Wg.set_hermitian(u, v, V[u] * std::conj(V[v]));
  return Wg;
}

BranchFlowPoint g_map(const GPartialMatrix& Wg, const Network& net) {
  BranchFlowPoint x;
  x.v.resize(net.n());
  for (int j = 0; j < net.n(); ++j) x.v[j] = Wg.diag(j).real();
  for (const Line& line : net.lines) {
    const int i = line.from, j = line.to;
    const Complex wii = Wg.diag(i), wjj = Wg.diag(j);
    const Complex wij = Wg.at(i, j), wji = Wg.at(j, i);
    x.S.push_back(std::conj(line.y) * (wii - wij));
    x.ell.push_back(std::norm(line.y) * (wii + wjj - wij - wji).real());
  }
  return x;
}

GPartialMatrix g_inv(const BranchFlowPoint& x, const Network& net) {
  if (static_cast<int>(x.v.size()) != net.n() || static_cast<int>(x.S.size()) != net.m() ||
      static_cast<int>(x.ell.size()) != net.m())
    throw ModelError("branch-flow point dimensions do not match the network");
  GPartialMatrix Wg(Graph::from_network(net));
  for (int j = 0; j < net.n(); ++j) Wg.set_diag(j, Complex(x.v[j], 0.0));
  for (int l = 0; l < net.m(); ++l) {
    const Line& line = net.lines[l];
    Wg.set_hermitian(line.from, line.to, x.v[line.from] - std::conj(line.z) * x.S[l]);
  }
  return Wg;
}

RecoveryReport recover_from_full(const HermitianMatrix& W, double tol) {
  const int n = W.n();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(W.dense());
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double l1 = n > 0 ? ev(n - 1) : 0.0;
  if (!(l1 > 0.0)) throw CompletionError("largest eigenvalue is not positive");
  RecoveryReport rep;
  rep.eig_ratio = clique_ratio(W.dense());
  rep.exact = rep.eig_ratio <= tol;
  if (rep.exact) {
    std::vector<Complex> V(n);
    const double s = std::sqrt(l1);
    for (int j = 0; j < n; ++j) V[j] = s * es.eigenvectors()(j, n - 1);
    normalize_phase(V);
    fill_voltages(rep, V);
  }
  return rep;
}

RecoveryReport recover_from_partial(const GPartialMatrix& Wg, double tol) {
  RecoveryReport rep;
  for (auto [u, v] : Wg.graph().edges())
    rep.eig_ratio = std::max(rep.eig_ratio, clique_ratio(Wg.submatrix({u, v})));
  rep.cycle_residual = safe_cycle_residual(Wg);
  rep.exact = rep.eig_ratio <= tol && rep.cycle_residual <= tol;
  if (rep.exact) {
    try {
      fill_voltages(rep, rank1_voltages(Wg, tol));
    } catch (const CompletionError& e) {
      rep.exact = false;
      rep.diagnostics.push_back(e.what());
    }
  }
  return rep;
}

RecoveryReport recover_from_chordal(const GPartialMatrix& Wch, const std::vector<Clique>& cliques,
                                    double tol) {
  RecoveryReport rep;
  for (const auto& c : cliques) rep.eig_ratio = std::max(rep.eig_ratio, clique_ratio(Wch.submatrix(c)));
  rep.cycle_residual = safe_cycle_residual(Wch);
  rep.exact = rep.eig_ratio <= tol;
  // Rank one on every maximal clique of a chordal pattern already implies a
  // rank-one completion; propagation along a tree recovers its voltages.
  if (rep.exact) fill_voltages(rep, propagate(Wch));
  return rep;
}

RecoveryReport recover_bf(const BranchFlowPoint& x, const Network& net, double soc_tol, double cycle_tol) {
  const int n = net.n(), m = net.m();
  if (static_cast<int>(x.v.size()) != n || static_cast<int>(x.S.size()) != m ||
      static_cast<int>(x.ell.size()) != m)
    throw ModelError("branch-flow point dimensions do not match the network");
  RecoveryReport rep;

  bool tight = true;
  for (int l = 0; l < m; ++l) {
    const double vi = x.v[net.lines[l].from];
    const double lhs = x.ell[l] * vi;
    const double slack = lhs - std::norm(x.S[l]);
    const double denom = std::max({lhs, std::norm(x.S[l]), 1e-9 * vi * vi, 1e-300});
    const double rel = std::max(slack, 0.0) / denom;
    rep.eig_ratio = std::max(rep.eig_ratio, rel);
    if (rel > soc_tol) tight = false;
  }

  std::vector<double> beta(m);
  for (int l = 0; l < m; ++l) {
    const Line& line = net.lines[l];
    const Complex w = x.v[line.from] - std::conj(line.z) * x.S[l];
    if (w == Complex(0.0, 0.0)) {
      rep.diagnostics.push_back("beta undefined on line " + std::to_string(l) + "; using 0");
      beta[l] = 0.0;
    } else {
      beta[l] = std::arg(w);
    }
  }

  // theta_from - theta_to = beta on a BFS spanning tree rooted at bus 0.
  const Graph g = Graph::from_network(net);
  const SpanningTree tree = bfs_tree(g, 0);
  std::vector<double> theta(n, 0.0);
  std::vector<char> tree_line(m, 0);
  for (int v : tree.order) {
    const int p = tree.parent[v];
    if (p < 0) continue;
    const int l = net.find_line(p, v);
    tree_line[l] = 1;
    theta[v] = net.lines[l].from == p ? theta[p] - beta[l] : theta[p] + beta[l];
  }
  for (int l = 0; l < m; ++l) {
    if (tree_line[l]) continue;
    const Line& line = net.lines[l];
    const double r = std::abs(wrap_angle(theta[line.from] - theta[line.to] - beta[l]));
    rep.cycle_residual = std::max(rep.cycle_residual, r);
  }
  rep.exact = tight && rep.cycle_residual <= cycle_tol;
  if (rep.exact) {
    std::vector<Complex> V(n);
    for (int j = 0; j < n; ++j) V[j] = std::polar(std::sqrt(std::max(x.v[j], 0.0)), theta[j]);
    rep.V = make_profile(net, V);
  }
  return rep;
}

bool in_W2nc(const GPartialMatrix& Wg, double tol) {
  const double zero = tol * std::max(Wg.scale(), 1e-300);
  for (int j = 0; j < Wg.n(); ++j)
    if (Wg.diag(j).real() < -zero || std::abs(Wg.diag(j).imag()) > zero) return false;
  for (auto [u, v] : Wg.graph().edges()) {
    if (std::abs(Wg.at(v, u) - std::conj(Wg.at(u, v))) > zero) return false;
    const Eigen::MatrixXcd m = Wg.submatrix({u, v});
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -zero) return false;
    if (es.eigenvalues()(1) > 0.0 && es.eigenvalues()(0) > tol * es.eigenvalues()(1)) return false;
  }
  return true;
}

BranchFlowPoint extract_bf(const ConicProgram& prog, const Eigen::VectorXd& x, const Network& net) {
  if (x.size() != prog.num_vars) throw ModelError("solution length differs from variable count");
  auto value = [&](SymbolKind k, int i) {
    const int idx = prog.labels.find({k, i, 0});
    if (idx < 0) throw ModelError("program has no branch-flow variables");
    return x(idx);
  };
  BranchFlowPoint bf;
  for (int l = 0; l < net.m(); ++l) {
    bf.S.emplace_back(value(SymbolKind::SRe, l), value(SymbolKind::SIm, l));
    bf.ell.push_back(value(SymbolKind::Ell, l));
  }
  for (int j = 0; j < net.n(); ++j) bf.v.push_back(value(SymbolKind::V, j));
  return bf;
}

const ComparisonRow& Comparison::row(RelaxationKind k) const {
  for (const auto& r : rows)
    if (r.kind == k) return r;
  throw ModelError(std::string("comparison has no row for ") + relaxation_name(k));
}

namespace {

ComparisonRow run_one(RelaxationKind kind, const Network& net, const CostSpec& cost, const CompareOptions& opt) {
  ComparisonRow row;
  row.kind = kind;
  ConicProgram prog;
  ChordalExtension ext;
  try {
    switch (kind) {
      case RelaxationKind::R1: prog = build_R1(net, cost, opt.r1_cap); break;
      case RelaxationKind::Rch:
        ext = chordal_extend(Graph::from_network(net));
        prog = build_Rch(net, cost, ext);
        break;
      case RelaxationKind::R2: prog = build_R2(net, cost); break;
      case RelaxationKind::BF: prog = build_BF(net, cost); break;
    }
  } catch (const ModelError& e) {
    row.note = e.what();
    return row;
  }
  row.available = true;
  const auto t0 = std::chrono::steady_clock::now();
  const ConicSolution sol = solve(prog, opt.settings);
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  row.status = sol.status;
  row.objective = sol.objective;
  row.iterations = sol.iterations;
  if (sol.status != SolveStatus::Optimal) {
    row.note = std::string("solver status ") + status_name(sol.status);
    return row;
  }
  const auto& th = opt.thresholds;
  try {
    switch (kind) {
      case RelaxationKind::R1:
        row.recovery = recover_from_full(extract_full(prog, sol.x, net.n()), th.eig_ratio);
        break;
      case RelaxationKind::Rch:
        row.recovery = recover_from_chordal(extract_partial(prog, sol.x, net.n()), ext.maximal_cliques, th.eig_ratio);
        break;
      case RelaxationKind::R2: {
        const GPartialMatrix Wg = extract_partial(prog, sol.x, net.n());
        row.recovery = recover_from_partial(Wg, std::max(th.eig_ratio, th.cycle));
        break;
      }
      case RelaxationKind::BF:
        row.recovery = recover_bf(extract_bf(prog, sol.x, net), net, th.soc, th.cycle);
        break;
    }
  } catch (const CompletionError& e) {
    row.recovery.diagnostics.push_back(e.what());
  }
  if (row.recovery.V) {
    auto& prof = *row.recovery.V;
    if (prof.I.empty()) prof = make_profile(net, prof.V);
    const double c = evaluate_cost(net, cost, prof.V);
    row.recovery.objective_gap_note = std::abs(c - sol.objective) / (1.0 + std::abs(sol.objective));
  }
  return row;
}

}  // namespace

Comparison compare_relaxations(const Network& net, const CostSpec& cost, const CompareOptions& options) {
  const RelaxationKind kinds[] = {RelaxationKind::R1, RelaxationKind::Rch, RelaxationKind::R2, RelaxationKind::BF};
  Comparison cmp;
  if (options.parallel) {
    std::vector<std::future<ComparisonRow>> jobs;
    for (auto k : kinds)
      jobs.push_back(std::async(std::launch::async, run_one, k, std::cref(net), std::cref(cost), std::cref(options)));
    for (auto& j : jobs) cmp.rows.push_back(j.get());
  } else {
    for (auto k : kinds) cmp.rows.push_back(run_one(k, net, cost, options));
  }

  auto ok = [](const ComparisonRow& r) { return r.available && r.status == SolveStatus::Optimal; };
  const auto& r1 = cmp.row(RelaxationKind::R1);
  const auto& rch = cmp.row(RelaxationKind::Rch);
  const auto& r2 = cmp.row(RelaxationKind::R2);
  const auto& bf = cmp.row(RelaxationKind::BF);
  cmp.ordering_ok = true;
  for (const auto& r : cmp.rows) {
    if (r.available && r.status != SolveStatus::Optimal) {
      cmp.ordering_ok = false;
      cmp.ordering_notes.push_back(std::string(relaxation_name(r.kind)) + " not optimal");
    }
  }
  const double ref = ok(r1) ? r1.objective : rch.objective;
  const double slack = options.ordering_tol * (1.0 + std::abs(ref));
  if (ok(r1) && ok(rch) && std::abs(r1.objective - rch.objective) > slack) {
    cmp.ordering_ok = false;
    cmp.ordering_notes.push_back("r1 != rch");
  }
  if (ok(rch) && ok(r2) && r2.objective > rch.objective + slack) {
    cmp.ordering_ok = false;
    cmp.ordering_notes.push_back("r2 > rch");
  }
  if (ok(r2) && ok(bf) && std::abs(r2.objective - bf.objective) > slack) {
    cmp.ordering_ok = false;
    cmp.ordering_notes.push_back("bf != r2");
  }
  return cmp;
}

std::string comparison_csv_header() {
  return "case,r1,rch,r2,bf,t_r1,t_rch,t_r2,t_bf,eig_ratio_r1,eig_ratio_rch,cycle_residual_r2,"
         "exact_r1,exact_rch,exact_r2,exact_bf,ordering_ok";
}

std::string comparison_csv_row(const std::string& name, const Comparison& cmp) {
  std::ostringstream os;
  os.precision(10);
  auto value = [&](RelaxationKind k) {
    const auto& r = cmp.row(k);
    if (!r.available || r.status != SolveStatus::Optimal) {
      os << ",";
      return;
    }
    os << "," << r.objective;
  };
  auto time = [&](RelaxationKind k) {
    const auto& r = cmp.row(k);
    os << ",";
    if (r.available) os << r.seconds;
  };
  const RelaxationKind kinds[] = {RelaxationKind::R1, RelaxationKind::Rch, RelaxationKind::R2, RelaxationKind::BF};
  os << name;
  for (auto k : kinds) value(k);
  for (auto k : kinds) time(k);
  auto ratio = [&](RelaxationKind k) {
    const auto& r = cmp.row(k);
    os << ",";
    if (r.available && r.status == SolveStatus::Optimal) os << r.recovery.eig_ratio;
  };
  ratio(RelaxationKind::R1);
  ratio(RelaxationKind::Rch);
  os << ",";
  if (cmp.row(RelaxationKind::R2).status == SolveStatus::Optimal) os << cmp.row(RelaxationKind::R2).recovery.cycle_residual;
  for (auto k : kinds) {
    const auto& r = cmp.row(k);
    os << ",";
    if (r.available && r.status == SolveStatus::Optimal) os << (r.recovery.exact ? 1 : 0);
  }
  os << "," << (cmp.ordering_ok ? 1 : 0);
  return os.str();
}

void to_json(nlohmann::json& j, const RecoveryReport& r) {
  j = nlohmann::json{{"eig_ratio", r.eig_ratio},
                     {"cycle_residual", r.cycle_residual},
                     {"exact", r.exact},
                     {"objective_gap_note", r.objective_gap_note},
                     {"diagnostics", r.diagnostics}};
  if (r.V) {
    auto pairs = [](const std::vector<Complex>& v) {
      nlohmann::json a = nlohmann::json::array();
      for (const auto& c : v) a.push_back({c.real(), c.imag()});
      return a;
    };
    j["V"] = {{"V", pairs(r.V->V)}, {"I", pairs(r.V->I)}, {"S", pairs(r.V->S)}};
  } else {
    j["V"] = nullptr;
  }
}

void to_json(nlohmann::json& j, const BranchFlowPoint& x) {
  nlohmann::json S = nlohmann::json::array();
  for (const auto& s : x.S) S.push_back({s.real(), s.imag()});
  j = nlohmann::json{{"S", S}, {"ell", x.ell}, {"v", x.v}};
}

void from_json(const nlohmann::json& j, BranchFlowPoint& x) {
  x = BranchFlowPoint{};
  for (const auto& s : j.at("S")) x.S.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
  x.ell = j.at("ell").get<std::vector<double>>();
  x.v = j.at("v").get<std::vector<double>>();
}

}  // namespace opfrelax
