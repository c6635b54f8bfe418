#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "opfrelax/cases.hpp"
#include "opfrelax/projection.hpp"
#include "opfrelax/recovery.hpp"
#include "opfrelax/report.hpp"

using namespace opfrelax;

namespace {

constexpr int kUsage = 2;
constexpr int kSolverFailure = 3;
constexpr int kInfeasible = 4;

int exit_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return 0;
    case SolveStatus::PrimalInfeasible:
    case SolveStatus::DualInfeasible: return kInfeasible;
    default: return kSolverFailure;
  }
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << text;
}

struct Common {
  std::string case_name;
  double tol = 1e-8;
  int max_iters = 200;
  double zero_resistance = 1e-5;
  std::string out;

  SolverSettings settings() const {
    SolverSettings s;
    s.tol_gap = s.tol_feas = tol;
    s.max_iters = max_iters;
    return s;
  }
  CaseData load() const {
    LoadOptions opt;
    opt.zero_resistance = zero_resistance;
    return load_case(case_name, opt);
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--tol", c.tol, "solver tolerance")->check(CLI::PositiveNumber);
  app->add_option("--max-iters", c.max_iters, "solver iteration limit")->check(CLI::PositiveNumber);
  app->add_option("--zero-resistance", c.zero_resistance, "resistance added to lossless lines (p.u.)")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--out", c.out, "output path (default stdout)");
}

int run_solve(const Common& c, const std::string& relaxation) {
  const CaseData data = c.load();
  const SolveOutcome out = solve_case(data.network, data.cost, parse_relaxation(relaxation), c.settings());
  emit(solve_report(c.case_name, out).dump(2) + "\n", c.out);
  return exit_code(out.solution.status);
}

int run_compare(const std::vector<std::string>& cases, const Common& c, bool serial) {
  std::string text = comparison_csv_header() + "\n";
  int code = 0;
  for (const auto& name : cases) {
    Common one = c;
    one.case_name = name;
    const CaseData data = one.load();
    CompareOptions opt;
    opt.settings = c.settings();
    opt.parallel = !serial;
    const Comparison cmp = compare_relaxations(data.network, data.cost, opt);
    text += comparison_csv_row(name, cmp) + "\n";
    for (const auto& row : cmp.rows)
      if (row.available && row.status != SolveStatus::Optimal) code = std::max(code, exit_code(row.status));
    for (const auto& note : cmp.ordering_notes) std::cerr << name << ": " << note << "\n";
  }
  emit(text, c.out);
  return code;
}

int run_chordal_info(const Common& c) {
  const CaseData data = c.load();
  const ChordalInfo info = chordal_info(Graph::from_network(data.network));
  emit(chordal_info_json(c.case_name, info).dump(2) + "\n", c.out);
  return 0;
}

int run_project(const Common& c, const std::string& plane, const std::string& set, int directions, int grid) {
  const CaseData data = c.load();
  ProjectionSpec spec;
  spec.plane = parse_plane(plane);
  spec.directions = directions;
  spec.grid = grid;
  const std::filesystem::path dir = c.out.empty() ? std::filesystem::path(".") : std::filesystem::path(c.out);
  std::filesystem::create_directories(dir);
  const std::string tag = plane_name(spec.plane);
  std::vector<std::string> files;
  auto write = [&](const std::string& file, const std::string& text) {
    emit(text, (dir / file).string());
    files.push_back(file);
    std::cout << (dir / file).string() << "\n";
  };
  if (set == "all" || set == "convex") {
    for (auto kind : {RelaxationKind::R1, RelaxationKind::R2}) {
      const auto pts = project_convex(data.network, spec, kind, c.settings());
      write(tag + "_sweep_" + relaxation_name(kind) + ".csv", sweep_csv(pts, spec.plane));
    }
  }
  if (set == "all" || set == "nonconvex")
    write(tag + "_grid_w1.csv", points_csv(project_nonconvex(data.network, spec), spec.plane));
  if (set == "all" || set == "w2nc")
    write(tag + "_grid_w2nc.csv", points_csv(project_W2nc(data.network, spec), spec.plane));
  emit(gnuplot_script(spec.plane, files), (dir / (tag + "_plot.gp")).string());
  return 0;
}

int run_recover(const std::string& solution_path, const Common& c) {
  std::ifstream in(solution_path);
  if (!in) throw ParseError("cannot read solution file '" + solution_path + "'");
  nlohmann::json report;
  try {
    report = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed solution file: ") + e.what());
  }
  Common one = c;
  if (one.case_name.empty()) one.case_name = report.at("case").get<std::string>();
  const CaseData data = one.load();
  const RelaxationKind kind = parse_relaxation(report.at("relaxation").get<std::string>());
  const ConicProgram prog = kind == RelaxationKind::Rch
                                ? build_Rch(data.network, data.cost, chordal_extend(Graph::from_network(data.network)))
                                : build_relaxation(kind, data.network, data.cost);
  const auto xs = report.at("x").get<std::vector<double>>();
  if (static_cast<int>(xs.size()) != prog.num_vars)
    throw ParseError("solution vector does not match the rebuilt program");
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  RecoveryReport rec = recover_solution(data.network, prog, kind, x);
  if (rec.V && rec.V->I.empty()) rec.V = make_profile(data.network, rec.V->V);
  nlohmann::json j = rec;
  j["case"] = one.case_name;
  j["relaxation"] = relaxation_name(kind);
  emit(j.dump(2) + "\n", c.out);
  return rec.exact ? 0 : kSolverFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conic relaxations of optimal power flow"};
  app.require_subcommand(1);

  Common solve_opts, compare_opts, info_opts, project_opts, recover_opts;
  std::string relaxation = "r1";
  auto* solve_cmd = app.add_subcommand("solve", "solve one relaxation and print a JSON report");
  add_common(solve_cmd, solve_opts);
  solve_cmd->add_option("--case", solve_opts.case_name, "bundled case name or MATPOWER file")->required();
  solve_cmd->add_option("--relaxation", relaxation, "r1 | rch | r2 | bf")
      ->check(CLI::IsMember({"r1", "rch", "r2", "bf"}));

  std::vector<std::string> compare_cases;
  bool serial = false;
  auto* compare_cmd = app.add_subcommand("compare", "solve r1, rch, r2 and bf and print a CSV table");
  add_common(compare_cmd, compare_opts);
  compare_cmd->add_option("--case", compare_cases, "bundled case names or MATPOWER files")->required();
  compare_cmd->add_flag("--serial", serial, "solve the relaxations one after another");

  auto* info_cmd = app.add_subcommand("chordal-info", "chordal extension statistics");
  add_common(info_cmd, info_opts);
  info_cmd->add_option("--case", info_opts.case_name, "bundled case name or MATPOWER file")->required();

  std::string plane = "p1p2", set = "all";
  int directions = 16, grid = 256;
  auto* project_cmd = app.add_subcommand("project", "projected feasible sets as CSV point clouds");
  add_common(project_cmd, project_opts);
  project_opts.case_name = "threebus";
  project_cmd->add_option("--case", project_opts.case_name, "three-bus case (default: threebus)");
  project_cmd->add_option("--plane", plane, "p1p2 | q1q2")->check(CLI::IsMember({"p1p2", "q1q2"}));
  project_cmd->add_option("--set", set, "all | convex | nonconvex | w2nc")
      ->check(CLI::IsMember({"all", "convex", "nonconvex", "w2nc"}));
  project_cmd->add_option("--directions", directions, "sweep directions (>= 4)");
  project_cmd->add_option("--grid", grid, "angle grid density (even, >= 16)");

  std::string solution_path;
  auto* recover_cmd = app.add_subcommand("recover", "voltage profile from a solve report");
  add_common(recover_cmd, recover_opts);
  recover_cmd->add_option("--case", recover_opts.case_name, "case override (default: the one named in the report)");
  recover_cmd->add_option("--solution", solution_path, "JSON written by solve")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*solve_cmd) return run_solve(solve_opts, relaxation);
    if (*compare_cmd) return run_compare(compare_cases, compare_opts, serial);
    if (*info_cmd) return run_chordal_info(info_opts);
    if (*project_cmd) return run_project(project_opts, plane, set, directions, grid);
    if (*recover_cmd) return run_recover(solution_path, recover_opts);
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInfeasible;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kUsage;
}
