#pragma once

#include <optional>
#include <string>
#include <vector>

#include "opfrelax/matpower.hpp"

namespace opfrelax {

/// Reference optima for a bundled case (NaN where not published).
struct ExpectedValues {
  double r1;
  double rch;
  double r2;
  double lambda_ratio_bound;
};

struct BundledCase {
  std::string name;
  std::string text;  // MATPOWER case text
  std::optional<ExpectedValues> expected;
};

/// "threebus", "case9", "case14", "case30".
std::vector<std::string> bundled_case_names();
std::optional<BundledCase> find_bundled_case(const std::string& name);

struct LoadOptions {
  ParseOptions parse;
  // Resistance added to lossless lines; 0 keeps the data as written.
  double zero_resistance = 1e-5;
};

/// Bundled name or path to a MATPOWER file. Throws ParseError for a missing
/// file or unknown name.
CaseData load_case(const std::string& name_or_path, const LoadOptions& options = {});

/// Three-bus network with shunts y11 = i0.375, y22 = i0.5, y33 = i0.575, all
/// magnitudes pinned to 1 and p3 = -0.95; other injections unbounded.
Network three_bus_network();

}  // namespace opfrelax
