#include "opfrelax/cases.hpp"

#include <fstream>
#include <limits>
#include <sstream>

namespace opfrelax {

namespace {

struct CaseEntry {
  const char* name;
  const char* text;
};

const CaseEntry kCases[] = {
#include "opfrelax_bundled_cases.inc"
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::optional<ExpectedValues> expected_for(const std::string& name) {
  if (name == "case9") return ExpectedValues{5297.4, 5297.4, 5297.4, 1e-5};
  if (name == "case14") return ExpectedValues{8081.7, 8081.7, 8075.3, 1e-5};
  if (name == "case30") return ExpectedValues{574.5, 574.5, 573.6, 1e-5};
  if (name == "threebus") return ExpectedValues{kNaN, kNaN, kNaN, 1e-5};
  return std::nullopt;
}

}  // namespace

Network three_bus_network() {
  Network net;
  net.buses.resize(3);
  net.bus_ids = {1, 2, 3};
  const Complex shunt[] = {{0.0, 0.375}, {0.0, 0.5}, {0.0, 0.575}};
  for (int j = 0; j < 3; ++j) {
    Bus& b = net.buses[j];
    b.v_min = b.v_max = 1.0;
    b.y_shunt = shunt[j];
    b.has_generator = true;
  }
  net.buses[2].load = {0.95, 0.0};
  net.buses[2].s_min = {-0.95, -kInf};
  net.buses[2].s_max = {-0.95, kInf};
  net.lines.push_back(Network::make_line(0, 1, 1.0 / Complex(0.0517, -1.1087)));
  net.lines.push_back(Network::make_line(0, 2, 1.0 / Complex(0.1673, -1.5954)));
  net.lines.push_back(Network::make_line(1, 2, 1.0 / Complex(0.0444, -1.3319)));
  net.validate();
  return net;
}

std::vector<std::string> bundled_case_names() {
  std::vector<std::string> names{"threebus"};
  for (const auto& c : kCases) names.emplace_back(c.name);
  return names;
}

std::optional<BundledCase> find_bundled_case(const std::string& name) {
  if (name == "threebus")
    return BundledCase{name, to_matpower(three_bus_network(), CostSpec::loss_min(), name), expected_for(name)};
  for (const auto& c : kCases)
    if (name == c.name) return BundledCase{name, c.text, expected_for(name)};
  return std::nullopt;
}

CaseData load_case(const std::string& name_or_path, const LoadOptions& options) {
  CaseData data;
  if (name_or_path == "threebus") {
    data.name = name_or_path;
    data.network = three_bus_network();
    data.cost = CostSpec::loss_min();
    return data;
  }
  if (auto bundled = find_bundled_case(name_or_path)) {
    data = parse_matpower(bundled->text, options.parse);
    data.name = name_or_path;
  } else {
    std::ifstream in(name_or_path);
    if (!in) throw ParseError("no bundled case or readable file named '" + name_or_path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    data = parse_matpower(buf.str(), options.parse);
    if (data.name.empty()) data.name = name_or_path;
  }
  if (options.zero_resistance > 0.0) data.network = fix_zero_resistance(std::move(data.network), options.zero_resistance);
  return data;
}

}  // namespace opfrelax
