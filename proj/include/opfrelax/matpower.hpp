#pragma once

#include <string>
#include <string_view>

#include "opfrelax/network.hpp"

namespace opfrelax {

/// Which magnitude the slack bus is pinned to (lower == upper bound).
enum class SlackPin {
  BusMagnitude,        // Vm column of the slack bus row
  GeneratorSetpoint,   // Vg of the first in-service generator at the slack bus (default)
  Unity,               // 1.0 p.u.
  None,                // keep the bus's [Vmin, Vmax] band
};

struct ParseOptions {
  bool allow_quadratic = true;
  SlackPin slack_pin = SlackPin::GeneratorSetpoint;
};

struct CaseData {
  std::string name;
  Network network;
  CostSpec cost;
};

/// Reads the MATPOWER version-2 case subset: baseMVA, bus, gen, branch and
/// (optionally) gencost. Buses are renumbered densely with the slack first.
CaseData parse_matpower(std::string_view text, const ParseOptions& options = {});

/// Writes a case that parse_matpower reads back to the same network and cost.
std::string to_matpower(const Network& net, const CostSpec& cost, std::string_view name = "case");

}  // namespace opfrelax
