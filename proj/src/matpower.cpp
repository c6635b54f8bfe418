#include "opfrelax/matpower.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

namespace opfrelax {

namespace {

using Matrix = std::vector<std::vector<double>>;

// Column indices of the MATPOWER case format (0-based).
namespace bus_col {
constexpr int kId = 0, kType = 1, kPd = 2, kQd = 3, kGs = 4, kBs = 5, kVm = 7, kVmax = 11,
              kVmin = 12, kCount = 13;
}
namespace gen_col {
constexpr int kBus = 0, kQmax = 3, kQmin = 4, kVg = 5, kStatus = 7, kPmax = 8, kPmin = 9,
              kCount = 10;
}
namespace branch_col {
constexpr int kFrom = 0, kTo = 1, kR = 2, kX = 3, kB = 4, kRatio = 8, kAngle = 9, kStatus = 10,
              kCount = 11;
}

std::string strip_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_quote = false;
  bool in_comment = false;
  for (char c : text) {
    if (in_comment) {
      if (c == '\n') {
        in_comment = false;
        out.push_back(c);
      }
      continue;
    }
    if (c == '\'') in_quote = !in_quote;
    if (c == '%' && !in_quote) {
      in_comment = true;
      continue;
    }
    if (c == '\n') in_quote = false;
    out.push_back(c);
  }
  return out;
}

double parse_number(const std::string& token, const std::string& field, int row) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0')
    throw ParseError("malformed matrix row " + std::to_string(row + 1) + " in mpc." + field +
                     ": bad token '" + token + "'");
  return v;
}

Matrix parse_matrix(std::string_view body, const std::string& field) {
  Matrix rows;
  std::string row_text;
  auto flush = [&]() {
    std::vector<double> row;
    std::string token;
    auto push = [&]() {
      if (!token.empty()) {
        row.push_back(parse_number(token, field, static_cast<int>(rows.size())));
        token.clear();
      }
    };
    for (char c : row_text) {
      if (c == ' ' || c == '\t' || c == ',' || c == '\r') {
        push();
      } else {
        token.push_back(c);
      }
    }
    push();
    if (!row.empty()) rows.push_back(std::move(row));
    row_text.clear();
  };
  for (char c : body) {
    if (c == ';' || c == '\n') {
      flush();
    } else if (c == '.' && !row_text.empty() && row_text.back() == '.') {
      // MATLAB line continuation "..."
      row_text.pop_back();
    } else {
      row_text.push_back(c);
    }
  }
  flush();
  return rows;
}

struct RawCase {
  std::optional<double> base_mva;
  std::map<std::string, Matrix> matrices;
};

RawCase scan(std::string_view text) {
  const std::string clean = strip_comments(text);
  RawCase raw;
  std::size_t pos = 0;
  while ((pos = clean.find("mpc.", pos)) != std::string::npos) {
    std::size_t p = pos + 4;
    std::size_t name_end = p;
    while (name_end < clean.size() &&
           (std::isalnum(static_cast<unsigned char>(clean[name_end])) || clean[name_end] == '_'))
      ++name_end;
    const std::string field = clean.substr(p, name_end - p);
    std::size_t eq = clean.find_first_not_of(" \t", name_end);
    if (eq == std::string::npos || clean[eq] != '=') {
      pos = name_end;
      continue;
    }
    std::size_t v = clean.find_first_not_of(" \t\r\n", eq + 1);
    if (v == std::string::npos) throw ParseError("mpc." + field + " has no value");
    if (clean[v] == '[') {
      const std::size_t close = clean.find(']', v);
      if (close == std::string::npos) throw ParseError("unterminated matrix mpc." + field);
      raw.matrices[field] = parse_matrix(std::string_view(clean).substr(v + 1, close - v - 1), field);
      pos = close + 1;
    } else if (clean[v] == '{') {
      const std::size_t close = clean.find('}', v);
      if (close == std::string::npos) throw ParseError("unterminated cell array mpc." + field);
      pos = close + 1;
    } else {
      const std::size_t semi = clean.find_first_of(";\n", v);
      std::string value = clean.substr(v, semi - v);
      while (!value.empty() && std::isspace(static_cast<unsigned char>(value.back()))) value.pop_back();
      if (field == "baseMVA") raw.base_mva = parse_number(value, field, 0);
      pos = semi == std::string::npos ? clean.size() : semi;
    }
  }
  return raw;
}

void require_columns(const Matrix& m, int count, const std::string& field) {
  for (std::size_t r = 0; r < m.size(); ++r) {
    if (static_cast<int>(m[r].size()) < count)
      throw ParseError("malformed matrix row " + std::to_string(r + 1) + " in mpc." + field +
                       ": expected at least " + std::to_string(count) + " columns");
  }
}

struct GenCost {
  double c2 = 0.0, c1 = 0.0, c0 = 0.0;
};

GenCost read_gencost(const std::vector<double>& row, int r) {
  if (row.size() < 4) throw ParseError("malformed matrix row " + std::to_string(r + 1) + " in mpc.gencost");
  const int model = static_cast<int>(row[0]);
  if (model != 2) throw ModelError("piecewise-linear generator costs are unsupported");
  const int ncoef = static_cast<int>(row[3]);
  if (ncoef < 0 || ncoef > 3)
    throw ModelError("polynomial generator costs of degree above 2 are unsupported");
  if (static_cast<int>(row.size()) < 4 + ncoef)
    throw ParseError("malformed matrix row " + std::to_string(r + 1) + " in mpc.gencost");
  GenCost g;
  // Coefficients are listed highest degree first.
  for (int k = 0; k < ncoef; ++k) {
    const int degree = ncoef - 1 - k;
    const double c = row[4 + k];
    if (degree == 2) g.c2 = c;
    if (degree == 1) g.c1 = c;
    if (degree == 0) g.c0 = c;
  }
  return g;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

CaseData parse_matpower(std::string_view text, const ParseOptions& options) {
  const RawCase raw = scan(text);
  if (!raw.base_mva) throw ParseError("missing mpc.baseMVA");
  for (const char* f : {"bus", "gen", "branch"})
    if (!raw.matrices.count(f)) throw ParseError(std::string("missing mpc.") + f);
  const double base = *raw.base_mva;
  if (!(base > 0.0)) throw ParseError("baseMVA must be positive");

  const Matrix& bus = raw.matrices.at("bus");
  const Matrix& gen = raw.matrices.at("gen");
  const Matrix& branch = raw.matrices.at("branch");
  require_columns(bus, bus_col::kCount, "bus");
  require_columns(gen, gen_col::kCount, "gen");
  require_columns(branch, branch_col::kCount, "branch");

  // Dense renumbering, slack first, isolated (type 4) buses dropped.
  int slack_row = -1;
  for (std::size_t r = 0; r < bus.size(); ++r) {
    if (static_cast<int>(bus[r][bus_col::kType]) == 3) {
      if (slack_row >= 0) throw ModelError("multiple slack buses");
      slack_row = static_cast<int>(r);
    }
  }
  if (slack_row < 0) throw ModelError("no slack bus");
  std::vector<int> order{slack_row};
  for (std::size_t r = 0; r < bus.size(); ++r)
    if (static_cast<int>(r) != slack_row && static_cast<int>(bus[r][bus_col::kType]) != 4)
      order.push_back(static_cast<int>(r));

  std::map<int, int> index_of;
  CaseData out;
  Network& net = out.network;
  net.base_mva = base;
  net.slack = 0;
  for (int k = 0; k < static_cast<int>(order.size()); ++k) {
    const auto& row = bus[order[k]];
    const int id = static_cast<int>(row[bus_col::kId]);
    if (index_of.count(id)) throw ParseError("duplicate bus id " + std::to_string(id));
    index_of[id] = k;
    Bus b;
    b.load = Complex(row[bus_col::kPd], row[bus_col::kQd]) / base;
    b.y_shunt = Complex(row[bus_col::kGs], row[bus_col::kBs]) / base;
    b.v_min = row[bus_col::kVmin];
    b.v_max = row[bus_col::kVmax];
    b.s_min = -b.load;
    b.s_max = -b.load;
    net.buses.push_back(b);
    net.bus_ids.push_back(id);
  }
  const int n = net.n();

  std::vector<double> gmin_p(n, 0.0), gmax_p(n, 0.0), gmin_q(n, 0.0), gmax_q(n, 0.0);
  std::vector<int> gen_bus;
  std::optional<double> slack_setpoint;
  for (std::size_t r = 0; r < gen.size(); ++r) {
    const auto& row = gen[r];
    const int id = static_cast<int>(row[gen_col::kBus]);
    auto it = index_of.find(id);
    if (it == index_of.end()) throw ParseError("generator at unknown bus " + std::to_string(id));
    gen_bus.push_back(row[gen_col::kStatus] > 0 ? it->second : -1);
    if (row[gen_col::kStatus] <= 0) continue;
    const int j = it->second;
    net.buses[j].has_generator = true;
    gmin_p[j] += row[gen_col::kPmin];
    gmax_p[j] += row[gen_col::kPmax];
    gmin_q[j] += row[gen_col::kQmin];
    gmax_q[j] += row[gen_col::kQmax];
    if (j == net.slack && !slack_setpoint) slack_setpoint = row[gen_col::kVg];
  }
  for (int j = 0; j < n; ++j) {
    auto& b = net.buses[j];
    if (!b.has_generator) continue;
    b.s_min = Complex(gmin_p[j], gmin_q[j]) / base - b.load;
    b.s_max = Complex(gmax_p[j], gmax_q[j]) / base - b.load;
  }

  double pin = -1.0;
  switch (options.slack_pin) {
    case SlackPin::BusMagnitude:
      pin = bus[slack_row][bus_col::kVm];
      break;
    case SlackPin::GeneratorSetpoint:
      pin = slack_setpoint.value_or(bus[slack_row][bus_col::kVm]);
      break;
    case SlackPin::Unity:
      pin = 1.0;
      break;
    case SlackPin::None:
      break;
  }
  if (pin > 0.0) {
    net.buses[net.slack].v_min = pin;
    net.buses[net.slack].v_max = pin;
  }

  for (std::size_t r = 0; r < branch.size(); ++r) {
    const auto& row = branch[r];
    if (row[branch_col::kStatus] <= 0) continue;
    auto fi = index_of.find(static_cast<int>(row[branch_col::kFrom]));
    auto ti = index_of.find(static_cast<int>(row[branch_col::kTo]));
    if (fi == index_of.end() || ti == index_of.end())
      throw ParseError("branch " + std::to_string(r + 1) + " references an unknown or isolated bus");
    if (fi->second == ti->second) throw ModelError("self-loop at branch " + std::to_string(r + 1));
    if (row[branch_col::kAngle] != 0.0)
      throw ModelError("phase-shifting transformer at branch " + std::to_string(r + 1) +
                       " is unsupported");
    const double ratio = row[branch_col::kRatio] == 0.0 ? 1.0 : row[branch_col::kRatio];
    const Complex z(row[branch_col::kR], row[branch_col::kX]);
    Line line = Network::make_line(fi->second, ti->second, z, Complex(ratio, 0.0), row[branch_col::kB]);
    const int existing = net.find_line(line.from, line.to);
    if (existing < 0) {
      net.lines.push_back(line);
      continue;
    }
    // Parallel branch: merge by admittance addition.
    Line& other = net.lines[existing];
    if (other.from != line.from || other.tap != line.tap)
      throw ModelError("parallel branches with differing taps or orientation at branch " +
                       std::to_string(r + 1));
    other.y += line.y;
    other.z = 1.0 / other.y;
    other.b_charge += line.b_charge;
  }

  net.validate();

  if (auto it = raw.matrices.find("gencost"); it != raw.matrices.end() && !it->second.empty()) {
    const Matrix& gc = it->second;
    if (gc.size() < gen.size()) throw ParseError("mpc.gencost has fewer rows than mpc.gen");
    CostSpec& cost = out.cost;
    cost.kind = CostKind::WeightedGen;
    cost.linear.assign(n, 0.0);
    cost.quadratic.assign(n, 0.0);
    cost.demand.assign(n, 0.0);
    std::vector<int> gens_at(n, 0);
    std::vector<GenCost> first(n);
    for (int j = 0; j < n; ++j) cost.demand[j] = net.buses[j].load.real();
    for (std::size_t r = 0; r < gen.size(); ++r) {
      const int j = gen_bus[r];
      if (j < 0) continue;
      const GenCost g = read_gencost(gc[r], static_cast<int>(r));
      if (g.c2 != 0.0 && !options.allow_quadratic)
        throw ModelError("quadratic generator cost at generator " + std::to_string(r + 1) +
                         " is unsupported");
      if (g.c2 < 0.0 || g.c1 < 0.0)
        throw ModelError("negative generator cost coefficients are unsupported");
      cost.constant += g.c0;
      if (gens_at[j]++ == 0) {
        first[j] = g;
        cost.linear[j] = g.c1 * base;
        cost.quadratic[j] = g.c2 * base * base;
      } else if (g.c2 != 0.0 || first[j].c2 != 0.0 || g.c1 != first[j].c1) {
        throw ModelError("generators with distinct or quadratic costs share bus " +
                         std::to_string(net.bus_ids[j]));
      }
    }
  }
  return out;
}

std::string to_matpower(const Network& net, const CostSpec& cost, std::string_view name) {
  const double base = net.base_mva;
  std::ostringstream os;
  os << "function mpc = " << name << "\n";
  os << "mpc.version = '2';\n";
  os << "mpc.baseMVA = " << fmt(base) << ";\n";
  auto id = [&](int j) { return j < static_cast<int>(net.bus_ids.size()) ? net.bus_ids[j] : j + 1; };

  os << "mpc.bus = [\n";
  for (int j = 0; j < net.n(); ++j) {
    const auto& b = net.buses[j];
    const int type = j == net.slack ? 3 : (b.has_generator ? 2 : 1);
    const double vm = j == net.slack ? b.v_max : 1.0;
    os << "\t" << id(j) << "\t" << type << "\t" << fmt(b.load.real() * base) << "\t"
       << fmt(b.load.imag() * base) << "\t" << fmt(b.y_shunt.real() * base) << "\t"
       << fmt(b.y_shunt.imag() * base) << "\t1\t" << fmt(vm) << "\t0\t0\t1\t" << fmt(b.v_max)
       << "\t" << fmt(b.v_min) << ";\n";
  }
  os << "];\n";

  os << "mpc.gen = [\n";
  for (int j = 0; j < net.n(); ++j) {
    const auto& b = net.buses[j];
    if (!b.has_generator) continue;
    const Complex gmin = (b.s_min + b.load) * base;
    const Complex gmax = (b.s_max + b.load) * base;
    os << "\t" << id(j) << "\t0\t0\t" << fmt(gmax.imag()) << "\t" << fmt(gmin.imag()) << "\t"
       << fmt(j == net.slack ? b.v_max : 1.0) << "\t" << fmt(base) << "\t1\t" << fmt(gmax.real())
       << "\t" << fmt(gmin.real()) << ";\n";
  }
  os << "];\n";

  os << "mpc.branch = [\n";
  for (const auto& l : net.lines) {
    const double ratio = l.plain() ? 0.0 : std::abs(l.tap);
    os << "\t" << id(l.from) << "\t" << id(l.to) << "\t" << fmt(l.z.real()) << "\t"
       << fmt(l.z.imag()) << "\t" << fmt(l.b_charge) << "\t0\t0\t0\t" << fmt(ratio)
       << "\t0\t1\t-360\t360;\n";
  }
  os << "];\n";

  if (cost.kind == CostKind::WeightedGen) {
    os << "mpc.gencost = [\n";
    bool first = true;
    for (int j = 0; j < net.n(); ++j) {
      if (!net.buses[j].has_generator) continue;
      const double c0 = first ? cost.constant : 0.0;
      first = false;
      os << "\t2\t0\t0\t3\t" << fmt(cost.quadratic[j] / (base * base)) << "\t"
         << fmt(cost.linear[j] / base) << "\t" << fmt(c0) << ";\n";
    }
    os << "];\n";
  }
  return os.str();
}

}  // namespace opfrelax
