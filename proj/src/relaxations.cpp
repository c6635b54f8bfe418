#include "opfrelax/relaxations.hpp"

#include <cmath>

namespace opfrelax {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Real and imaginary parts of coef * W(a, b) as expressions in W variables.
void add_term(const ProgramBuilder& pb, int a, int b, Complex coef, LinearExpr& p, LinearExpr& q) {
  if (a == b) {
    const int d = pb.variable({SymbolKind::WDiag, a, a});
    p.add(d, coef.real());
    q.add(d, coef.imag());
    return;
  }
  const int lo = std::min(a, b), hi = std::max(a, b);
  const int re = pb.variable({SymbolKind::WRe, lo, hi});
  const int im = pb.variable({SymbolKind::WIm, lo, hi});
  // W(a,b) = R + i I when a < b, R - i I otherwise.
  const double sgn = a < b ? 1.0 : -1.0;
  p.add(re, coef.real());
  p.add(im, -sgn * coef.imag());
  q.add(re, coef.imag());
  q.add(im, sgn * coef.real());
}

void add_bounds(ProgramBuilder& pb, const Network& net, const std::vector<LinearExpr>& p,
                const std::vector<LinearExpr>& q, const std::vector<LinearExpr>& vsq) {
  for (int j = 0; j < net.n(); ++j) {
    const Bus& bus = net.buses[j];
    pb.add_range(p[j], bus.s_min.real(), bus.s_max.real());
    pb.add_range(q[j], bus.s_min.imag(), bus.s_max.imag());
    pb.add_range(vsq[j], bus.v_min * bus.v_min, bus.v_max * bus.v_max);
  }
}

void add_objective(ProgramBuilder& pb, const CostFunctional& f) {
  pb.add_objective(f.linear);
  for (std::size_t k = 0; k < f.quadratic.size(); ++k) {
    const auto& [expr, coef] = f.quadratic[k];
    // t >= coef * expr^2  <=>  2 * t * (1/2) >= (sqrt(coef) expr)^2
    const int t = pb.add_variable({SymbolKind::Epigraph, static_cast<int>(k), 0});
    LinearExpr a;
    a.add(t, 1.0);
    LinearExpr b;
    b.constant = 0.5;
    pb.add_cone(ConeKind::RotatedSecondOrder, 3, {a, b, expr.scaled(std::sqrt(coef))});
    LinearExpr obj;
    obj.add(t, 1.0);
    pb.add_objective(obj);
  }
}

void add_w_variables(ProgramBuilder& pb, const Graph& pattern) {
  for (int j = 0; j < pattern.n(); ++j) pb.add_variable({SymbolKind::WDiag, j, j});
  for (auto [u, v] : pattern.edges()) {
    pb.add_variable({SymbolKind::WRe, u, v});
    pb.add_variable({SymbolKind::WIm, u, v});
  }
}

// Injection bounds, voltage bounds and the objective for a W-space program.
void add_w_model(ProgramBuilder& pb, const Network& net, const CostSpec& cost) {
  const InjectionMap map = build_injection_map(net);
  std::vector<LinearExpr> p(net.n()), q(net.n()), vsq(net.n());
  for (int j = 0; j < net.n(); ++j) {
    for (const auto& t : map.terms[j]) add_term(pb, t.row, t.col, t.coef, p[j], q[j]);
    p[j].compress();
    q[j].compress();
    vsq[j].add(pb.variable({SymbolKind::WDiag, j, j}), 1.0);
  }
  add_bounds(pb, net, p, q, vsq);
  add_objective(pb, build_cost(net, cost, p, q));
}

// Real embedding [[X, -Y], [Y, X]] of W restricted to a clique, in svec rows.
std::vector<LinearExpr> embedded_clique(const ProgramBuilder& pb, const Clique& c) {
  const int k = static_cast<int>(c.size());
  const int K = 2 * k;
  std::vector<LinearExpr> rows(K * (K + 1) / 2);
  auto entry = [&](int r, int col) {
    // Value of M(r, col), r >= col.
    LinearExpr e;
    const bool rlow = r >= k, clow = col >= k;
    const int a = rlow ? r - k : r, b = clow ? col - k : col;
    if (rlow == clow) {  // X block
      if (a == b) {
        e.add(pb.variable({SymbolKind::WDiag, c[a], c[a]}), 1.0);
      } else {
        const int lo = std::min(c[a], c[b]), hi = std::max(c[a], c[b]);
        e.add(pb.variable({SymbolKind::WRe, lo, hi}), 1.0);
      }
    } else if (a != b) {  // Y block, lower-left: Y(a, b) = Im W(c_a, c_b)
      const int lo = std::min(c[a], c[b]), hi = std::max(c[a], c[b]);
      e.add(pb.variable({SymbolKind::WIm, lo, hi}), c[a] < c[b] ? 1.0 : -1.0);
    }
    return e;
  };
  for (int col = 0; col < K; ++col)
    for (int r = col; r < K; ++r) {
      LinearExpr e = entry(r, col);
      rows[svec_index(K, r, col)] = r == col ? e : e.scaled(kSqrt2);
    }
  return rows;
}

}  // namespace

Complex InjectionMap::evaluate(int j, const HermitianMatrix& W) const {
  Complex s(0.0, 0.0);
  for (const auto& t : terms[j]) s += t.coef * W(t.row, t.col);
  return s;
}

Complex InjectionMap::evaluate(int j, const GPartialMatrix& Wg) const {
  Complex s(0.0, 0.0);
  for (const auto& t : terms[j]) s += t.coef * Wg.at(t.row, t.col);
  return s;
}

InjectionMap build_injection_map(const Network& net) {
  InjectionMap map;
  map.terms.resize(net.n());
  for (int j = 0; j < net.n(); ++j) {
    const Complex ysh = shunt_coefficient(net, j);
    map.terms[j].push_back({j, j, ysh});
  }
  for (const auto& line : net.lines) {
    const TwoPort tp = two_port(line);
    const int f = line.from, t = line.to;
    // s_f = V_f conj(I_f) = conj(yff) W_ff + conj(yft) W_ft
    map.terms[f][0].coef += std::conj(tp.yff);
    map.terms[f].push_back({f, t, std::conj(tp.yft)});
    map.terms[t][0].coef += std::conj(tp.ytt);
    map.terms[t].push_back({t, f, std::conj(tp.ytf)});
  }
  return map;
}

const char* relaxation_name(RelaxationKind k) {
  switch (k) {
    case RelaxationKind::R1: return "r1";
    case RelaxationKind::Rch: return "rch";
    case RelaxationKind::R2: return "r2";
    case RelaxationKind::BF: return "bf";
  }
  return "?";
}

RelaxationKind parse_relaxation(const std::string& name) {
  for (auto k : {RelaxationKind::R1, RelaxationKind::Rch, RelaxationKind::R2, RelaxationKind::BF})
    if (name == relaxation_name(k)) return k;
  throw ModelError("unknown relaxation '" + name + "' (expected r1, rch, r2 or bf)");
}

CostFunctional build_cost(const Network& net, const CostSpec& cost, const std::vector<LinearExpr>& p,
                          const std::vector<LinearExpr>& q) {
  cost.validate(net.n());
  CostFunctional f;
  switch (cost.kind) {
    case CostKind::LossMin:
      for (int j = 0; j < net.n(); ++j) f.linear += p[j];
      break;
    case CostKind::WeightedGen:
      for (int j = 0; j < net.n(); ++j) {
        const double d = cost.demand.empty() ? 0.0 : cost.demand[j];
        if (!cost.linear.empty() && cost.linear[j] != 0.0) {
          LinearExpr gen = p[j];
          gen.constant += d;
          f.linear += gen.scaled(cost.linear[j]);
        }
        if (!cost.quadratic.empty() && cost.quadratic[j] > 0.0) {
          LinearExpr gen = p[j];
          gen.constant += d;
          f.quadratic.emplace_back(gen, cost.quadratic[j]);
        }
      }
      f.linear.constant += cost.constant;
      break;
    case CostKind::Directional:
      for (int j = 0; j < net.n(); ++j) {
        if (!cost.p_weight.empty() && cost.p_weight[j] != 0.0) f.linear += p[j].scaled(cost.p_weight[j]);
        if (!cost.q_weight.empty() && cost.q_weight[j] != 0.0) f.linear += q[j].scaled(cost.q_weight[j]);
      }
      break;
  }
  f.linear.compress();
  return f;
}

ConicProgram build_Rch(const Network& net, const CostSpec& cost, const ChordalExtension& ext) {
  net.validate();
  const Graph g = Graph::from_network(net);
  if (ext.filled.n() != net.n() || !ext.filled.contains(g))
    throw ModelError("chordal extension does not cover the network graph");
  ProgramBuilder pb;
  add_w_variables(pb, ext.filled);
  for (const auto& c : ext.maximal_cliques)
    pb.add_cone(ConeKind::PsdReal, 2 * static_cast<int>(c.size()), embedded_clique(pb, c));
  add_w_model(pb, net, cost);
  return pb.build();
}

ConicProgram build_R1(const Network& net, const CostSpec& cost, int cap) {
  if (net.n() > cap)
    throw ModelError("R1 needs a dense " + std::to_string(2 * net.n()) + "x" +
                     std::to_string(2 * net.n()) + " block; bus count " + std::to_string(net.n()) +
                     " exceeds the cap " + std::to_string(cap));
  return build_Rch(net, cost, complete_extension(Graph::from_network(net)));
}

ConicProgram build_R2(const Network& net, const CostSpec& cost) {
  net.validate();
  const Graph g = Graph::from_network(net);
  ProgramBuilder pb;
  add_w_variables(pb, g);
  for (auto [u, v] : g.edges()) {
    LinearExpr a, b, re, im;
    a.add(pb.variable({SymbolKind::WDiag, u, u}), 1.0 / kSqrt2);
    b.add(pb.variable({SymbolKind::WDiag, v, v}), 1.0 / kSqrt2);
    re.add(pb.variable({SymbolKind::WRe, u, v}), 1.0);
    im.add(pb.variable({SymbolKind::WIm, u, v}), 1.0);
    pb.add_cone(ConeKind::RotatedSecondOrder, 4, {a, b, re, im});
  }
  add_w_model(pb, net, cost);
  return pb.build();
}

ConicProgram build_BF(const Network& net, const CostSpec& cost) {
  net.validate();
  if (!net.tap_free()) throw ModelError("branch-flow relaxation supports tap-free lines only");
  const int n = net.n(), m = net.m();
  ProgramBuilder pb;
  for (int l = 0; l < m; ++l) pb.add_variable({SymbolKind::SRe, l, 0});
  for (int l = 0; l < m; ++l) pb.add_variable({SymbolKind::SIm, l, 0});
  for (int l = 0; l < m; ++l) pb.add_variable({SymbolKind::Ell, l, 0});
  for (int j = 0; j < n; ++j) pb.add_variable({SymbolKind::V, j, 0});
  auto sre = [&](int l) { return pb.variable({SymbolKind::SRe, l, 0}); };
  auto sim = [&](int l) { return pb.variable({SymbolKind::SIm, l, 0}); };
  auto ell = [&](int l) { return pb.variable({SymbolKind::Ell, l, 0}); };
  auto vv = [&](int j) { return pb.variable({SymbolKind::V, j, 0}); };

  for (int l = 0; l < m; ++l) {
    const Line& line = net.lines[l];
    LinearExpr a, b, re, im;
    a.add(ell(l), 1.0 / kSqrt2);
    b.add(vv(line.from), 1.0 / kSqrt2);
    re.add(sre(l), 1.0);
    im.add(sim(l), 1.0);
    pb.add_cone(ConeKind::RotatedSecondOrder, 4, {a, b, re, im});
  }
  for (int l = 0; l < m; ++l) {
    // v_j - v_i + 2 Re(conj(z) S) - |z|^2 ell = 0
    const Line& line = net.lines[l];
    LinearExpr e;
    e.add(vv(line.to), 1.0);
    e.add(vv(line.from), -1.0);
    e.add(sre(l), 2.0 * line.z.real());
    e.add(sim(l), 2.0 * line.z.imag());
    e.add(ell(l), -std::norm(line.z));
    pb.add_equality(e);
  }

  std::vector<LinearExpr> p(n), q(n), vsq(n);
  for (int j = 0; j < n; ++j) {
    Complex ysh = shunt_coefficient(net, j);
    for (const auto& line : net.lines)
      if (line.from == j || line.to == j) ysh += std::conj(Complex(0.0, line.b_charge / 2.0));
    p[j].add(vv(j), ysh.real());
    q[j].add(vv(j), ysh.imag());
    vsq[j].add(vv(j), 1.0);
  }
  for (int l = 0; l < m; ++l) {
    const Line& line = net.lines[l];
    // sending end: + S; receiving end: -(S - z ell)
    p[line.from].add(sre(l), 1.0);
    q[line.from].add(sim(l), 1.0);
    p[line.to].add(sre(l), -1.0);
    q[line.to].add(sim(l), -1.0);
    p[line.to].add(ell(l), line.z.real());
    q[line.to].add(ell(l), line.z.imag());
  }
  for (int j = 0; j < n; ++j) {
    p[j].compress();
    q[j].compress();
  }
  add_bounds(pb, net, p, q, vsq);
  add_objective(pb, build_cost(net, cost, p, q));
  return pb.build();
}

ConicProgram build_relaxation(RelaxationKind kind, const Network& net, const CostSpec& cost) {
  switch (kind) {
    case RelaxationKind::R1: return build_R1(net, cost);
    case RelaxationKind::Rch: return build_Rch(net, cost, chordal_extend(Graph::from_network(net)));
    case RelaxationKind::R2: return build_R2(net, cost);
    case RelaxationKind::BF: return build_BF(net, cost);
  }
  throw ModelError("unknown relaxation");
}

Graph pattern_from_labels(const ConicProgram& prog, int n) {
  Graph g(n);
  for (int v = 0; v < prog.labels.size(); ++v) {
    const Symbol& s = prog.labels.symbol(v);
    if (s.kind == SymbolKind::WRe) g.add_edge(s.i, s.j);
  }
  return g;
}

GPartialMatrix extract_partial(const ConicProgram& prog, const Eigen::VectorXd& x, int n) {
  if (x.size() != prog.num_vars) throw ModelError("solution length differs from variable count");
  GPartialMatrix Wg(pattern_from_labels(prog, n));
  for (int j = 0; j < n; ++j) {
    const int d = prog.labels.find({SymbolKind::WDiag, j, j});
    if (d < 0) throw ModelError("program has no W variables");
    Wg.set_diag(j, Complex(x(d), 0.0));
  }
  for (auto [u, v] : Wg.graph().edges()) {
    const double re = x(prog.labels.find({SymbolKind::WRe, u, v}));
    const double im = x(prog.labels.find({SymbolKind::WIm, u, v}));
    Wg.set_hermitian(u, v, Complex(re, im));
  }
  return Wg;
}

HermitianMatrix extract_full(const ConicProgram& prog, const Eigen::VectorXd& x, int n) {
  const GPartialMatrix Wg = extract_partial(prog, x, n);
  if (Wg.graph().m() != n * (n - 1) / 2) throw ModelError("program does not carry a full W");
  HermitianMatrix W(n);
  for (int j = 0; j < n; ++j) W.set(j, j, Wg.diag(j));
  for (auto [u, v] : Wg.graph().edges()) W.set(u, v, Wg.at(u, v));
  return W;
}

}  // namespace opfrelax
