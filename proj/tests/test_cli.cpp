#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(OPFRELAX_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("opfrelax_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("cli usage errors") {
  CHECK(run("") == 2);
  CHECK(run("solve") == 2);
  CHECK(run("solve --case missing.m") == 2);
  CHECK(run("solve --case case9 --relaxation r7") == 2);
  CHECK(run("project --plane x1x2") == 2);
}

TEST_CASE("cli solve then recover") {
  const fs::path dir = scratch("solve");
  const fs::path report = dir / "r1.json";
  REQUIRE(run("solve --case case9 --relaxation r1 --out " + report.string()) == 0);
  const auto j = nlohmann::json::parse(slurp(report));
  CHECK(j.at("status") == "optimal");
  CHECK(j.at("relaxation") == "r1");
  const fs::path rec = dir / "rec.json";
  CHECK(run("recover --solution " + report.string() + " --out " + rec.string()) == 0);
  const auto r = nlohmann::json::parse(slurp(rec));
  CHECK(r.contains("eig_ratio"));
  CHECK(run("recover --solution " + (dir / "none.json").string()) == 2);

  // r2 is not exact on case9: recovery reports failure
  const fs::path r2 = dir / "r2.json";
  REQUIRE(run("solve --case case9 --relaxation r2 --out " + r2.string()) == 0);
  CHECK(run("recover --solution " + r2.string()) == 3);
}

TEST_CASE("cli compare and chordal-info") {
  const fs::path dir = scratch("compare");
  REQUIRE(run("compare --case case9 --serial --out " + (dir / "c.csv").string()) == 0);
  const std::string csv = slurp(dir / "c.csv");
  CHECK(csv.rfind("case,r1,rch,r2,bf,", 0) == 0);
  CHECK(csv.find("\ncase9,") != std::string::npos);

  REQUIRE(run("chordal-info --case case30 --out " + (dir / "info.json").string()) == 0);
  const auto info = nlohmann::json::parse(slurp(dir / "info.json"));
  CHECK(info.at("buses") == 30);
}

TEST_CASE("cli project writes the CSV files") {
  const fs::path dir = scratch("project");
  REQUIRE(run("project --plane p1p2 --directions 4 --grid 32 --out " + dir.string()) == 0);
  for (const char* f : {"p1p2_sweep_r1.csv", "p1p2_sweep_r2.csv", "p1p2_grid_w1.csv", "p1p2_grid_w2nc.csv",
                        "p1p2_plot.gp"})
    CHECK(fs::exists(dir / f));
  CHECK(slurp(dir / "p1p2_grid_w1.csv").rfind("p1,p2\n", 0) == 0);
}
