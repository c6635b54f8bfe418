#include "opfrelax/projection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <sstream>
#include <thread>

namespace opfrelax {

const char* plane_name(Plane p) { return p == Plane::P1P2 ? "p1p2" : "q1q2"; }

Plane parse_plane(const std::string& s) {
  if (s == "p1p2" || s == "P1P2" || s == "p") return Plane::P1P2;
  if (s == "q1q2" || s == "Q1Q2" || s == "q") return Plane::Q1Q2;
  throw ParseError("unknown plane '" + s + "' (expected p1p2 or q1q2)");
}

std::vector<Pin> three_bus_pins() {
  return {{Pin::Kind::Magnitude, 0, 1.0},
          {Pin::Kind::Magnitude, 1, 1.0},
          {Pin::Kind::Magnitude, 2, 1.0},
          {Pin::Kind::P, 2, -0.95}};
}

Network apply_pins(Network net, const std::vector<Pin>& pins) {
  for (const Pin& pin : pins) {
    if (pin.bus < 0 || pin.bus >= net.n()) throw ModelError("pin on unknown bus " + std::to_string(pin.bus));
    Bus& b = net.buses[pin.bus];
    switch (pin.kind) {
      case Pin::Kind::Magnitude:
        if (pin.value < 0.0) throw ModelError("negative magnitude pin");
        b.v_min = b.v_max = std::sqrt(pin.value);
        break;
      case Pin::Kind::P:
        b.s_min = {pin.value, b.s_min.imag()};
        b.s_max = {pin.value, b.s_max.imag()};
        break;
      case Pin::Kind::Q:
        b.s_min = {b.s_min.real(), pin.value};
        b.s_max = {b.s_max.real(), pin.value};
        break;
    }
  }
  return net;
}

void ProjectionSpec::validate(int n) const {
  if (directions < 4) throw ModelError("projection needs at least 4 directions");
  if (grid < 16 || grid % 2 != 0) throw ModelError("projection grid must be an even number >= 16");
  if (bus_a < 0 || bus_a >= n || bus_b < 0 || bus_b >= n || bus_a == bus_b)
    throw ModelError("projection buses must be two distinct buses of the network");
}

namespace {

Point2 project(Plane plane, Complex sa, Complex sb) {
  return plane == Plane::P1P2 ? Point2{sa.real(), sb.real()} : Point2{sa.imag(), sb.imag()};
}

}  // namespace

std::vector<SweepPoint> project_convex(const Network& net_in, const ProjectionSpec& spec, RelaxationKind which,
                                       const SolverSettings& settings) {
  const Network net = apply_pins(net_in, spec.pins);
  spec.validate(net.n());
  if (which == RelaxationKind::BF) throw ModelError("projection sweeps use the bus injection relaxations");
  const InjectionMap inj = build_injection_map(net);
  const bool reactive = spec.plane == Plane::Q1Q2;

  auto run = [&](int k) {
    SweepPoint sp;
    sp.phi = 2.0 * kPi * k / spec.directions;
    const CostSpec cost =
        CostSpec::directional(net.n(), spec.bus_a, std::cos(sp.phi), spec.bus_b, std::sin(sp.phi), reactive);
    ChordalExtension ext;
    ConicProgram prog;
    if (which == RelaxationKind::Rch) {
      ext = chordal_extend(Graph::from_network(net));
      prog = build_Rch(net, cost, ext);
    } else {
      prog = build_relaxation(which, net, cost);
    }
    const ConicSolution sol = solve(prog, settings);
    sp.status = sol.status;
    sp.objective = sol.objective;
    if (sol.status == SolveStatus::PrimalInfeasible) throw InfeasibleError("infeasible pin set");
    if (sol.status != SolveStatus::Optimal) return sp;
    const GPartialMatrix Wg = extract_partial(prog, sol.x, net.n());
    sp.point = project(spec.plane, inj.evaluate(spec.bus_a, Wg), inj.evaluate(spec.bus_b, Wg));
    try {
      if (which == RelaxationKind::R1)
        sp.recovery = recover_from_full(extract_full(prog, sol.x, net.n()));
      else if (which == RelaxationKind::Rch)
        sp.recovery = recover_from_chordal(Wg, ext.maximal_cliques);
      else
        sp.recovery = recover_from_partial(Wg);
    } catch (const CompletionError& e) {
      sp.recovery.diagnostics.push_back(e.what());
    }
    return sp;
  };

  std::vector<std::future<SweepPoint>> jobs;
  for (int k = 0; k < spec.directions; ++k) jobs.push_back(std::async(std::launch::async, run, k));
  std::vector<SweepPoint> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

namespace {

// s_j = c0 + sum over edges of a e^{i phi_e} + b e^{-i phi_e}, with
// W(u,v) = r_e e^{i phi_e} for u < v and magnitudes fixed.
struct AffineInjection {
  struct Term {
    int edge;
    Complex a, b;
  };
  Complex c0;
  std::vector<Term> terms;
};

struct AngleModel {
  std::vector<std::pair<int, int>> edges;
  std::vector<AffineInjection> bus;
};

AngleModel angle_model(const Network& net) {
  AngleModel m;
  m.edges = Graph::from_network(net).edges();
  std::vector<double> mag(net.n());
  for (int j = 0; j < net.n(); ++j) {
    const Bus& b = net.buses[j];
    if (b.v_min != b.v_max) throw ModelError("angle sampler needs every magnitude pinned");
    mag[j] = b.v_min;
  }
  const InjectionMap inj = build_injection_map(net);
  m.bus.resize(net.n());
  for (int j = 0; j < net.n(); ++j) {
    AffineInjection& f = m.bus[j];
    for (const auto& t : inj.terms[j]) {
      if (t.row == t.col) {
        f.c0 += t.coef * mag[t.row] * mag[t.row];
        continue;
      }
      const std::pair<int, int> key{std::min(t.row, t.col), std::max(t.row, t.col)};
      const int e = static_cast<int>(std::lower_bound(m.edges.begin(), m.edges.end(), key) - m.edges.begin());
      const Complex c = t.coef * mag[t.row] * mag[t.col];
      auto it = std::find_if(f.terms.begin(), f.terms.end(), [&](const auto& x) { return x.edge == e; });
      if (it == f.terms.end()) {
        f.terms.push_back({e, 0.0, 0.0});
        it = f.terms.end() - 1;
      }
      (t.row < t.col ? it->a : it->b) += c;
    }
  }
  return m;
}

struct Constraint {
  int bus;
  bool reactive;
  double lo, hi;
  bool pinned;
};

// Grid sampler over parameters t (each on G points of [-pi, pi)); edge angles
// phi = D t. Keeps points meeting every injection bound, with pinned
// quantities allowed half a cell of first-order slack.
std::vector<Point2> sample(const Network& net, const ProjectionSpec& spec, const std::vector<std::vector<int>>& D,
                           int params, double slack_scale) {
  spec.validate(net.n());
  const AngleModel model = angle_model(net);
  const int G = spec.grid;
  const int E = static_cast<int>(model.edges.size());
  if (params > 3 || E > 3) throw ModelError("angle sampler supports at most three free angles");
  const double step = 2.0 * kPi / G;
  std::vector<Complex> unit(G);
  for (int k = 0; k < G; ++k) unit[k] = std::polar(1.0, -kPi + k * step);

  std::vector<Constraint> cons;
  for (int j = 0; j < net.n(); ++j) {
    const Bus& b = net.buses[j];
    if (std::isfinite(b.s_min.real()) || std::isfinite(b.s_max.real()))
      cons.push_back({j, false, b.s_min.real(), b.s_max.real(), b.s_min.real() == b.s_max.real()});
    if (std::isfinite(b.s_min.imag()) || std::isfinite(b.s_max.imag()))
      cons.push_back({j, true, b.s_min.imag(), b.s_max.imag(), b.s_min.imag() == b.s_max.imag()});
  }

  // Index of phi_e on the grid: offset by G/2 because t = -pi + k step.
  auto run = [&](int first) {
    std::vector<Point2> pts;
    std::vector<int> idx(params, 0);
    std::vector<int> phi(E);
    std::vector<Complex> e(E);
    idx[0] = first;
    while (true) {
      for (int a = 0; a < E; ++a) {
        long s = 0, ones = 0;
        for (int k = 0; k < params; ++k) {
          s += static_cast<long>(D[a][k]) * idx[k];
          ones += D[a][k];
        }
        // sum of D t = step * (s - ones * G/2)  (mod 2 pi) -> grid index
        const long off = (static_cast<long>(G) / 2) * (1 - ones);
        phi[a] = static_cast<int>(((s + off) % G + G) % G);
        e[a] = unit[phi[a]];
      }
      bool keep = true;
      for (const auto& c : cons) {
        const AffineInjection& f = model.bus[c.bus];
        Complex val = f.c0;
        std::array<double, 3> dval{};
        for (const auto& t : f.terms) {
          const Complex ee = e[t.edge];
          val += t.a * ee + t.b * std::conj(ee);
          const Complex d = kI * (t.a * ee - t.b * std::conj(ee));
          const double dv = c.reactive ? d.imag() : d.real();
          for (int k = 0; k < params; ++k) dval[k] += D[t.edge][k] * dv;
        }
        const double v = c.reactive ? val.imag() : val.real();
        double slack = 0.0;
        if (c.pinned) {
          for (int k = 0; k < params; ++k) slack += std::abs(dval[k]);
          slack *= 0.5 * step * slack_scale;
        }
        if (v < c.lo - slack || v > c.hi + slack) {
          keep = false;
          break;
        }
      }
      if (keep) {
        auto eval = [&](int j) {
          const AffineInjection& f = model.bus[j];
          Complex val = f.c0;
          for (const auto& t : f.terms) val += t.a * e[t.edge] + t.b * std::conj(e[t.edge]);
          return val;
        };
        pts.push_back(project(spec.plane, eval(spec.bus_a), eval(spec.bus_b)));
      }
      int k = params - 1;
      while (k > 0 && ++idx[k] == G) idx[k--] = 0;
      if (k == 0) break;
    }
    return pts;
  };

  std::vector<Point2> out;
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  // Evaluate in batches of hw threads.
  for (int lo = 0; lo < G; lo += static_cast<int>(hw)) {
    std::vector<std::future<std::vector<Point2>>> batch;
    for (int f = lo; f < std::min(G, lo + static_cast<int>(hw)); ++f)
      batch.push_back(std::async(std::launch::async, run, f));
    for (auto& b : batch) {
      auto part = b.get();
      out.insert(out.end(), part.begin(), part.end());
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::vector<Point2> project_nonconvex(const Network& net_in, const ProjectionSpec& spec, double slack_scale) {
  const Network net = apply_pins(net_in, spec.pins);
  if (net.n() != 3) throw ModelError("nonconvex sampler supports three-bus networks");
  // theta_0 = 0; parameters theta_1, theta_2; phi_(u,v) = theta_u - theta_v.
  const auto edges = Graph::from_network(net).edges();
  std::vector<std::vector<int>> D;
  for (auto [u, v] : edges) {
    std::vector<int> row(2, 0);
    if (u > 0) row[u - 1] += 1;
    if (v > 0) row[v - 1] -= 1;
    D.push_back(row);
  }
  return sample(net, spec, D, 2, slack_scale);
}

std::vector<Point2> project_W2nc(const Network& net_in, const ProjectionSpec& spec, double slack_scale) {
  const Network net = apply_pins(net_in, spec.pins);
  if (net.n() != 3) throw ModelError("nonconvex sampler supports three-bus networks");
  const int m = Graph::from_network(net).m();
  std::vector<std::vector<int>> D(m, std::vector<int>(m, 0));
  for (int a = 0; a < m; ++a) D[a][a] = 1;
  return sample(net, spec, D, m, slack_scale);
}

std::vector<Point2> pareto_front(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end());
  std::vector<Point2> front;
  double best_y = kInf;
  for (const auto& p : pts) {
    if (p.y < best_y) {
      if (!front.empty() && front.back().x == p.x) front.pop_back();
      front.push_back(p);
      best_y = p.y;
    }
  }
  return front;
}

namespace {

struct Raster {
  int size = 0;  // res + 2 including the empty border
  std::vector<char> occ;
};

Raster rasterize(const std::vector<Point2>& pts, int res) {
  if (res < 1) throw ModelError("raster resolution must be positive");
  double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
  for (const auto& p : pts) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double wx = x1 > x0 ? x1 - x0 : 1.0, wy = y1 > y0 ? y1 - y0 : 1.0;
  auto cell = [&](double v, double lo, double w) { return 1 + std::min(res - 1, static_cast<int>((v - lo) / w * res)); };
  Raster r;
  r.size = res + 2;
  r.occ.assign(static_cast<size_t>(r.size) * r.size, 0);
  for (const auto& p : pts) r.occ[static_cast<size_t>(cell(p.y, y0, wy)) * r.size + cell(p.x, x0, wx)] = 1;
  return r;
}

// Flood-fills every cell whose value is `want`; returns the component count.
int label(std::vector<char>& occ, int size, char want, bool diagonal) {
  int count = 0;
  std::vector<int> stack;
  for (int start = 0; start < size * size; ++start) {
    if (occ[start] != want) continue;
    ++count;
    occ[start] = 2;
    stack.push_back(start);
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      const int r = c / size, col = c % size;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          if ((dr == 0 && dc == 0) || (!diagonal && dr != 0 && dc != 0)) continue;
          const int rr = r + dr, cc = col + dc;
          if (rr < 0 || rr >= size || cc < 0 || cc >= size) continue;
          const int nb = rr * size + cc;
          if (occ[nb] == want) {
            occ[nb] = 2;
            stack.push_back(nb);
          }
        }
    }
  }
  return count;
}

}  // namespace

int count_components(const std::vector<Point2>& pts, int res) {
  if (pts.empty()) return 0;
  Raster r = rasterize(pts, res);
  return label(r.occ, r.size, 1, true);
}

int count_complement_components(const std::vector<Point2>& pts, int res) {
  if (pts.empty()) return 1;
  Raster r = rasterize(pts, res);
  return label(r.occ, r.size, 0, false);
}

std::string points_csv(const std::vector<Point2>& pts, Plane plane) {
  std::vector<Point2> sorted = pts;
  std::sort(sorted.begin(), sorted.end());
  std::ostringstream os;
  os.precision(12);
  os << (plane == Plane::P1P2 ? "p1,p2\n" : "q1,q2\n");
  for (const auto& p : sorted) os << p.x << "," << p.y << "\n";
  return os.str();
}

std::string sweep_csv(const std::vector<SweepPoint>& pts, Plane plane) {
  std::vector<SweepPoint> sorted = pts;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.phi < b.phi; });
  std::ostringstream os;
  os.precision(12);
  os << "phi," << (plane == Plane::P1P2 ? "p1,p2" : "q1,q2") << ",objective,status,eig_ratio,cycle_residual,exact\n";
  for (const auto& p : sorted)
    os << p.phi << "," << p.point.x << "," << p.point.y << "," << p.objective << "," << status_name(p.status) << ","
       << p.recovery.eig_ratio << "," << p.recovery.cycle_residual << "," << (p.recovery.exact ? 1 : 0) << "\n";
  return os.str();
}

}  // namespace opfrelax
