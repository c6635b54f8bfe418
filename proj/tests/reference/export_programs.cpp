// Writes the regression set of conic programs used for cross-validation
// against an external solver. Usage: opfrelax_export_programs <dir>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <nlohmann/json.hpp>

#include "opfrelax/cases.hpp"
#include "opfrelax/projection.hpp"
#include "opfrelax/relaxations.hpp"
#include "../support.hpp"

using namespace opfrelax;

namespace {

LinearExpr var(int v, double c = 1.0, double k = 0.0) {
  LinearExpr e;
  e.add(v, c);
  e.constant = k;
  return e;
}

ConicProgram synthetic_lp(std::mt19937_64& rng) {
  // min c'x s.t. x in box, sum x = 1
  ProgramBuilder pb;
  LinearExpr obj, sum;
  for (int k = 0; k < 6; ++k) {
    const int x = pb.add_variable({SymbolKind::V, k, 0});
    obj.add(x, testsupport::uniform(rng, -1, 1));
    sum.add(x, 1.0);
    pb.add_range(var(x), -1.0, 1.0);
  }
  sum.constant = -1.0;
  pb.add_objective(obj);
  pb.add_equality(sum);
  return pb.build();
}

ConicProgram synthetic_soc(std::mt19937_64& rng) {
  // min t + c'x s.t. |x - a| <= t, x >= 0
  ProgramBuilder pb;
  const int t = pb.add_variable({SymbolKind::Epigraph, 0, 0});
  LinearExpr obj = var(t);
  std::vector<LinearExpr> rows{var(t)};
  for (int k = 0; k < 5; ++k) {
    const int x = pb.add_variable({SymbolKind::V, k, 0});
    obj.add(x, testsupport::uniform(rng, 0.0, 0.5));
    rows.push_back(var(x, 1.0, -testsupport::uniform(rng, -1, 1)));
    pb.add_range(var(x), 0.0, kInf);
  }
  pb.add_objective(obj);
  pb.add_cone(ConeKind::SecondOrder, 6, rows);
  return pb.build();
}

ConicProgram synthetic_rsoc(std::mt19937_64& rng) {
  // min a + b + c'u s.t. 2ab >= |u|^2, u in box
  ProgramBuilder pb;
  const int a = pb.add_variable({SymbolKind::V, 0, 0});
  const int b = pb.add_variable({SymbolKind::V, 1, 0});
  LinearExpr obj;
  obj.add(a, 1.0);
  obj.add(b, 2.0);
  std::vector<LinearExpr> rows{var(a), var(b)};
  for (int k = 0; k < 3; ++k) {
    const int u = pb.add_variable({SymbolKind::SRe, k, 0});
    obj.add(u, testsupport::uniform(rng, -1, 1));
    rows.push_back(var(u));
    pb.add_range(var(u), 0.5, 2.0);
  }
  pb.add_objective(obj);
  pb.add_cone(ConeKind::RotatedSecondOrder, 5, rows);
  return pb.build();
}

ConicProgram synthetic_psd(std::mt19937_64& rng, int k) {
  // min <C, X> s.t. X PSD, diag X = 1
  ProgramBuilder pb;
  std::vector<std::vector<int>> X(k, std::vector<int>(k, -1));
  for (int j = 0; j < k; ++j)
    for (int i = j; i < k; ++i) X[i][j] = pb.add_variable({SymbolKind::WRe, j, i});
  LinearExpr obj;
  std::vector<LinearExpr> rows;
  for (int j = 0; j < k; ++j)
    for (int i = j; i < k; ++i) {
      obj.add(X[i][j], testsupport::uniform(rng, -1, 1) * (i == j ? 1.0 : 2.0));
      rows.push_back(var(X[i][j], i == j ? 1.0 : std::sqrt(2.0)));
    }
  pb.add_objective(obj);
  for (int j = 0; j < k; ++j) pb.add_equality(var(X[j][j], 1.0, -1.0));
  pb.add_cone(ConeKind::PsdReal, k, rows);
  return pb.build();
}

ConicProgram synthetic_mixed(std::mt19937_64& rng) {
  // PSD block plus a norm bound on its off-diagonal entries plus box rows
  ProgramBuilder pb;
  const int k = 3;
  std::vector<std::vector<int>> X(k, std::vector<int>(k, -1));
  for (int j = 0; j < k; ++j)
    for (int i = j; i < k; ++i) X[i][j] = pb.add_variable({SymbolKind::WRe, j, i});
  const int t = pb.add_variable({SymbolKind::Epigraph, 0, 0});
  LinearExpr obj = var(t, 0.5);
  std::vector<LinearExpr> psd, soc{var(t)};
  for (int j = 0; j < k; ++j)
    for (int i = j; i < k; ++i) {
      obj.add(X[i][j], testsupport::uniform(rng, -1, 1));
      psd.push_back(var(X[i][j], i == j ? 1.0 : std::sqrt(2.0)));
      if (i != j) soc.push_back(var(X[i][j]));
      else pb.add_range(var(X[i][j]), 0.5, 2.0);
    }
  LinearExpr trace;
  for (int j = 0; j < k; ++j) trace.add(X[j][j], 1.0);
  trace.constant = -3.0;
  pb.add_equality(trace);
  pb.add_objective(obj);
  pb.add_cone(ConeKind::PsdReal, k, psd);
  pb.add_cone(ConeKind::SecondOrder, 4, soc);
  return pb.build();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: opfrelax_export_programs <dir>\n";
    return 2;
  }
  const std::filesystem::path dir(argv[1]);
  std::filesystem::create_directories(dir);
  int count = 0;
  auto write = [&](const std::string& name, const ConicProgram& p) {
    std::ofstream(dir / (name + ".json")) << nlohmann::json(p).dump() << "\n";
    ++count;
  };

  std::mt19937_64 rng(2024);
  write("synthetic_lp", synthetic_lp(rng));
  write("synthetic_soc", synthetic_soc(rng));
  write("synthetic_rsoc", synthetic_rsoc(rng));
  write("synthetic_psd4", synthetic_psd(rng, 4));
  write("synthetic_psd6", synthetic_psd(rng, 6));
  write("synthetic_mixed", synthetic_mixed(rng));

  const Network pinned = apply_pins(three_bus_network(), three_bus_pins());
  for (int k : {0, 5, 10}) {
    const double phi = 2 * kPi * k / 16;
    for (bool reactive : {false, true}) {
      const CostSpec cost = CostSpec::directional(3, 0, std::cos(phi), 1, std::sin(phi), reactive);
      const std::string tag = std::string("threebus_") + (reactive ? "q" : "p") + std::to_string(k);
      write(tag + "_r1", build_R1(pinned, cost));
      if (!reactive) write(tag + "_r2", build_R2(pinned, cost));
    }
  }

  const CaseData c9 = load_case("case9");
  for (auto kind : {RelaxationKind::R1, RelaxationKind::Rch, RelaxationKind::R2, RelaxationKind::BF})
    write(std::string("case9_") + relaxation_name(kind), build_relaxation(kind, c9.network, c9.cost));
  const CaseData c14 = load_case("case14");
  for (auto kind : {RelaxationKind::R1, RelaxationKind::Rch, RelaxationKind::R2})
    write(std::string("case14_") + relaxation_name(kind), build_relaxation(kind, c14.network, c14.cost));
  const CaseData c30 = load_case("case30");
  for (auto kind : {RelaxationKind::Rch, RelaxationKind::R2})
    write(std::string("case30_") + relaxation_name(kind), build_relaxation(kind, c30.network, c30.cost));

  const auto tree = testsupport::random_network(rng, testsupport::random_connected_graph(rng, 10, 0));
  write("random_tree_r1", build_R1(tree.net, CostSpec::loss_min()));
  write("random_tree_bf", build_BF(tree.net, CostSpec::loss_min()));
  const auto mesh = testsupport::random_network(rng, testsupport::random_connected_graph(rng, 12, 6));
  write("random_mesh_rch", build_relaxation(RelaxationKind::Rch, mesh.net, CostSpec::loss_min()));
  write("random_mesh_r2", build_R2(mesh.net, CostSpec::loss_min()));

  std::cout << count << " programs written to " << dir.string() << "\n";
  return 0;
}
