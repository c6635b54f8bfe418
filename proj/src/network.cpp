#include "opfrelax/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <nlohmann/json.hpp>

namespace opfrelax {

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

Line Network::make_line(int from, int to, Complex z, Complex tap, double b_charge) {
  if (z == Complex(0.0, 0.0)) throw ModelError("line impedance must be nonzero");
  Line line;
  line.from = from;
  line.to = to;
  line.z = z;
  line.y = 1.0 / z;
  line.tap = tap;
  line.b_charge = b_charge;
  return line;
}

int Network::find_line(int a, int b) const {
  for (int e = 0; e < m(); ++e) {
    const auto& l = lines[e];
    if ((l.from == a && l.to == b) || (l.from == b && l.to == a)) return e;
  }
  return -1;
}

std::vector<std::pair<int, int>> Network::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.emplace_back(std::min(l.from, l.to), std::max(l.from, l.to));
  return out;
}

bool Network::connected() const {
  if (n() == 0) return false;
  std::vector<std::vector<int>> adj(n());
  for (const auto& l : lines) {
    adj[l.from].push_back(l.to);
    adj[l.to].push_back(l.from);
  }
  std::vector<char> seen(n(), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        q.push(v);
      }
    }
  }
  return count == n();
}

bool Network::tap_free() const {
  return std::all_of(lines.begin(), lines.end(), [](const Line& l) { return l.plain(); });
}

void Network::validate() const {
  if (n() == 0) throw ModelError("network has no buses");
  if (slack < 0 || slack >= n()) throw ModelError("slack bus index out of range");
  for (int e = 0; e < m(); ++e) {
    const auto& l = lines[e];
    if (l.from < 0 || l.from >= n() || l.to < 0 || l.to >= n())
      throw ModelError("line " + std::to_string(e) + " references a missing bus");
    if (l.from == l.to) throw ModelError("self-loop on bus " + std::to_string(l.from));
    if (std::abs(l.y * l.z - Complex(1.0, 0.0)) > 1e-12)
      throw ModelError("line " + std::to_string(e) + " violates y*z = 1");
    if (std::abs(l.tap) == 0.0) throw ModelError("zero tap ratio");
    for (int f = 0; f < e; ++f) {
      const auto& k = lines[f];
      if ((k.from == l.from && k.to == l.to) || (k.from == l.to && k.to == l.from))
        throw ModelError("parallel lines between buses " + std::to_string(l.from) + " and " +
                         std::to_string(l.to));
    }
  }
  for (int j = 0; j < n(); ++j) {
    const auto& b = buses[j];
    if (b.s_min.real() > b.s_max.real() || b.s_min.imag() > b.s_max.imag())
      throw ModelError("injection bounds inverted at bus " + std::to_string(j));
    if (!(b.v_min > 0.0) || b.v_min > b.v_max)
      throw ModelError("voltage bounds invalid at bus " + std::to_string(j));
  }
  if (!connected()) throw ModelError("islanded network");
}

TwoPort two_port(const Line& line) {
  const Complex ys = line.y;
  const Complex half_b{0.0, 0.5 * line.b_charge};
  const Complex t = line.tap;
  TwoPort tp;
  tp.yff = (ys + half_b) / (t * std::conj(t));
  tp.yft = -ys / std::conj(t);
  tp.ytf = -ys / t;
  tp.ytt = ys + half_b;
  return tp;
}

Complex shunt_coefficient(const Network& net, int j) {
  const Complex y = net.buses[j].y_shunt;
  return net.shunt_convention == ShuntConvention::Conjugated ? std::conj(y) : y;
}

Complex injection(const Network& net, std::span<const Complex> V, int j) {
  if (static_cast<int>(V.size()) != net.n()) throw ModelError("voltage vector size mismatch");
  Complex s = std::norm(V[j]) * shunt_coefficient(net, j);
  for (const auto& l : net.lines) {
    if (l.from != j && l.to != j) continue;
    const TwoPort tp = two_port(l);
    if (l.from == j) {
      const Complex I = tp.yff * V[l.from] + tp.yft * V[l.to];
      s += V[j] * std::conj(I);
    } else {
      const Complex I = tp.ytf * V[l.from] + tp.ytt * V[l.to];
      s += V[j] * std::conj(I);
    }
  }
  return s;
}

std::vector<Complex> injections(const Network& net, std::span<const Complex> V) {
  std::vector<Complex> s(net.n());
  for (int j = 0; j < net.n(); ++j) s[j] = injection(net, V, j);
  return s;
}

bool check_feasible(const Network& net, std::span<const Complex> V, double tol) {
  if (static_cast<int>(V.size()) != net.n()) return false;
  for (int j = 0; j < net.n(); ++j) {
    const auto& b = net.buses[j];
    const double mag = std::abs(V[j]);
    if (mag < b.v_min - tol || mag > b.v_max + tol) return false;
    const Complex s = injection(net, V, j);
    if (s.real() < b.s_min.real() - tol || s.real() > b.s_max.real() + tol) return false;
    if (s.imag() < b.s_min.imag() - tol || s.imag() > b.s_max.imag() + tol) return false;
  }
  return true;
}

double evaluate_cost(const Network& net, const CostSpec& cost, std::span<const Complex> V) {
  const auto s = injections(net, V);
  double total = cost.constant;
  for (int j = 0; j < net.n(); ++j) {
    switch (cost.kind) {
      case CostKind::LossMin:
        total += s[j].real();
        break;
      case CostKind::WeightedGen: {
        const double pg = s[j].real() + cost.demand[j];
        total += cost.linear[j] * pg + cost.quadratic[j] * pg * pg;
        break;
      }
      case CostKind::Directional:
        total += cost.p_weight[j] * s[j].real() + cost.q_weight[j] * s[j].imag();
        break;
    }
  }
  return total;
}

Network fix_zero_resistance(Network net, double eps) {
  for (auto& l : net.lines) {
    if (l.z.real() == 0.0) {
      l.z = Complex(eps, l.z.imag());
      l.y = 1.0 / l.z;
    }
  }
  return net;
}

CostSpec CostSpec::directional(int n, int bus_a, double wa, int bus_b, double wb, bool reactive) {
  CostSpec c;
  c.kind = CostKind::Directional;
  c.p_weight.assign(n, 0.0);
  c.q_weight.assign(n, 0.0);
  auto& w = reactive ? c.q_weight : c.p_weight;
  w[bus_a] += wa;
  w[bus_b] += wb;
  return c;
}

void CostSpec::validate(int n) const {
  switch (kind) {
    case CostKind::LossMin:
      return;
    case CostKind::WeightedGen:
      if (static_cast<int>(linear.size()) != n || static_cast<int>(quadratic.size()) != n ||
          static_cast<int>(demand.size()) != n)
        throw ModelError("weighted generation cost needs one entry per bus");
      for (int j = 0; j < n; ++j)
        if (linear[j] < 0.0 || quadratic[j] < 0.0)
          throw ModelError("generation cost weights must be nonnegative");
      return;
    case CostKind::Directional:
      if (static_cast<int>(p_weight.size()) != n || static_cast<int>(q_weight.size()) != n)
        throw ModelError("directional cost needs one weight per bus");
      return;
  }
}

bool CostSpec::has_quadratic() const {
  return kind == CostKind::WeightedGen &&
         std::any_of(quadratic.begin(), quadratic.end(), [](double q) { return q != 0.0; });
}

namespace {

// JSON has no infinity; unbounded limits are written as null.
nlohmann::json bound_to_json(double v) {
  if (std::isinf(v)) return nullptr;
  return v;
}

double bound_from_json(const nlohmann::json& j, double if_null) {
  return j.is_null() ? if_null : j.get<double>();
}

nlohmann::json complex_to_json(Complex c) { return {c.real(), c.imag()}; }

Complex complex_from_json(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

}  // namespace

void to_json(nlohmann::json& j, const Network& net) {
  j = nlohmann::json::object();
  j["base_mva"] = net.base_mva;
  j["slack"] = net.slack;
  j["shunt_convention"] =
      net.shunt_convention == ShuntConvention::Conjugated ? "conjugated" : "as_displayed";
  auto buses = nlohmann::json::array();
  for (int k = 0; k < net.n(); ++k) {
    const auto& b = net.buses[k];
    buses.push_back({{"id", k < static_cast<int>(net.bus_ids.size()) ? net.bus_ids[k] : k + 1},
                     {"p_min", bound_to_json(b.s_min.real())},
                     {"p_max", bound_to_json(b.s_max.real())},
                     {"q_min", bound_to_json(b.s_min.imag())},
                     {"q_max", bound_to_json(b.s_max.imag())},
                     {"v_min", b.v_min},
                     {"v_max", b.v_max},
                     {"y_shunt", complex_to_json(b.y_shunt)},
                     {"load", complex_to_json(b.load)},
                     {"has_generator", b.has_generator}});
  }
  j["buses"] = buses;
  auto lines = nlohmann::json::array();
  for (const auto& l : net.lines) {
    lines.push_back({{"from", l.from},
                     {"to", l.to},
                     {"z", complex_to_json(l.z)},
                     {"tap", complex_to_json(l.tap)},
                     {"b_charge", l.b_charge}});
  }
  j["lines"] = lines;
}

void from_json(const nlohmann::json& j, Network& net) {
  net = Network{};
  net.base_mva = j.value("base_mva", 100.0);
  net.slack = j.value("slack", 0);
  net.shunt_convention = j.value("shunt_convention", std::string("conjugated")) == "as_displayed"
                             ? ShuntConvention::AsDisplayed
                             : ShuntConvention::Conjugated;
  for (const auto& jb : j.at("buses")) {
    Bus b;
    b.s_min = {bound_from_json(jb.at("p_min"), -kInf), bound_from_json(jb.at("q_min"), -kInf)};
    b.s_max = {bound_from_json(jb.at("p_max"), kInf), bound_from_json(jb.at("q_max"), kInf)};
    b.v_min = jb.at("v_min").get<double>();
    b.v_max = jb.at("v_max").get<double>();
    if (jb.contains("y_shunt")) b.y_shunt = complex_from_json(jb.at("y_shunt"));
    if (jb.contains("load")) b.load = complex_from_json(jb.at("load"));
    b.has_generator = jb.value("has_generator", false);
    net.bus_ids.push_back(jb.value("id", static_cast<int>(net.buses.size()) + 1));
    net.buses.push_back(b);
  }
  for (const auto& jl : j.at("lines")) {
    const Complex tap = jl.contains("tap") ? complex_from_json(jl.at("tap")) : Complex(1.0, 0.0);
    net.lines.push_back(Network::make_line(jl.at("from").get<int>(), jl.at("to").get<int>(),
                                           complex_from_json(jl.at("z")), tap,
                                           jl.value("b_charge", 0.0)));
  }
  net.validate();
}

void to_json(nlohmann::json& j, const CostSpec& cost) {
  j = nlohmann::json::object();
  switch (cost.kind) {
    case CostKind::LossMin:
      j["kind"] = "loss_min";
      break;
    case CostKind::WeightedGen:
      j["kind"] = "weighted_gen";
      j["linear"] = cost.linear;
      j["quadratic"] = cost.quadratic;
      j["demand"] = cost.demand;
      break;
    case CostKind::Directional:
      j["kind"] = "directional";
      j["p_weight"] = cost.p_weight;
      j["q_weight"] = cost.q_weight;
      break;
  }
  j["constant"] = cost.constant;
}

void from_json(const nlohmann::json& j, CostSpec& cost) {
  cost = CostSpec{};
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "loss_min") {
    cost.kind = CostKind::LossMin;
  } else if (kind == "weighted_gen") {
    cost.kind = CostKind::WeightedGen;
    cost.linear = j.at("linear").get<std::vector<double>>();
    cost.quadratic = j.at("quadratic").get<std::vector<double>>();
    cost.demand = j.at("demand").get<std::vector<double>>();
  } else if (kind == "directional") {
    cost.kind = CostKind::Directional;
    cost.p_weight = j.at("p_weight").get<std::vector<double>>();
    cost.q_weight = j.at("q_weight").get<std::vector<double>>();
  } else {
    throw ParseError("unknown cost kind '" + kind + "'");
  }
  cost.constant = j.value("constant", 0.0);
}

}  // namespace opfrelax
