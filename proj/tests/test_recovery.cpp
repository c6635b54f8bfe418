#include <doctest.h>

#include <nlohmann/json.hpp>

#include "opfrelax/cases.hpp"
#include "opfrelax/recovery.hpp"
#include "opfrelax/report.hpp"
#include "support.hpp"

using namespace opfrelax;
using testsupport::max_abs_diff;

namespace {

// Same voltages up to a global phase.
double phase_free_diff(std::vector<Complex> a, std::vector<Complex> b) {
  return max_abs_diff(testsupport::dephase(std::move(a)), testsupport::dephase(std::move(b)));
}

}  // namespace

TEST_CASE("g_map example on one line") {
  Network net;
  net.buses.resize(2);
  net.lines.push_back(Network::make_line(0, 1, {0.0, 1.0}));
  const std::vector<Complex> V{1.0, 0.9};
  const BranchFlowPoint x = g_map(f_map(V, Graph::from_network(net)), net);
  // I = y (V1 - V2) = -0.1i, S = V1 conj(I) = 0.1i, ell = 0.01
  CHECK(std::abs(x.S[0] - Complex(0.0, 0.1)) < 1e-14);
  CHECK(x.ell[0] == doctest::Approx(0.01));
  CHECK(x.v[1] == doctest::Approx(0.81));
}

TEST_CASE("g_map agrees with the physical flows of f(V)") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = testsupport::uniform_int(rng, 2, 12);
    const auto rc = testsupport::random_network(rng, testsupport::random_connected_graph(rng, n, 3));
    const auto V = testsupport::random_voltages(rng, n);
    const BranchFlowPoint x = g_map(f_map(V, Graph::from_network(rc.net)), rc.net);
    const VoltageProfile prof = make_profile(rc.net, V);
    for (int l = 0; l < rc.net.m(); ++l) {
      CHECK(std::abs(x.S[l] - prof.S[l]) < 1e-10);
      CHECK(std::abs(x.ell[l] - std::norm(prof.I[l])) < 1e-10);
      CHECK(std::abs(x.ell[l] * x.v[rc.net.lines[l].from] - std::norm(x.S[l])) < 1e-9);
    }
  }
}

TEST_CASE("g_inv inverts g_map on rank-one points") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = testsupport::uniform_int(rng, 2, 12);
    const auto rc = testsupport::random_network(rng, testsupport::random_connected_graph(rng, n, 3));
    const GPartialMatrix W = f_map(testsupport::random_voltages(rng, n), Graph::from_network(rc.net));
    const GPartialMatrix back = g_inv(g_map(W, rc.net), rc.net);
    CHECK(max_abs_diff(back, W) < 1e-10);
  }
}

TEST_CASE("recover_from_full examples") {
  const std::vector<Complex> V{1.0, std::polar(0.9, -0.3), std::polar(1.1, 0.4)};
  const RecoveryReport r = recover_from_full(HermitianMatrix::outer(V));
  CHECK(r.exact);
  CHECK(r.eig_ratio == 0.0);
  REQUIRE(r.V);
  CHECK(phase_free_diff(r.V->V, V) < 1e-12);

  const RecoveryReport id = recover_from_full(HermitianMatrix::identity(3));
  CHECK_FALSE(id.exact);
  CHECK(id.eig_ratio == doctest::Approx(1.0));

  CHECK_THROWS_AS(recover_from_full(HermitianMatrix(Eigen::MatrixXcd::Zero(2, 2))), CompletionError);
}

TEST_CASE("recover_from_partial and recover_from_chordal examples") {
  std::mt19937_64 rng(43);
  const auto V = testsupport::random_voltages(rng, 5);
  const GPartialMatrix W1 = f_map(V, testsupport::pendant_cycle());
  const RecoveryReport r = recover_from_partial(W1);
  CHECK(r.exact);
  REQUIRE(r.V);
  CHECK(phase_free_diff(r.V->V, V) < 1e-10);

  // Break the cycle by rotating one edge.
  GPartialMatrix bad = W1;
  bad.set_hermitian(0, 1, W1.at(0, 1) * std::polar(1.0, 0.5));
  const RecoveryReport rb = recover_from_partial(bad);
  CHECK_FALSE(rb.exact);
  CHECK(rb.cycle_residual == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(in_W2nc(bad, 1e-9));

  const ChordalExtension ext = chordal_extend(testsupport::pendant_cycle());
  const RecoveryReport rc = recover_from_chordal(f_map(V, ext.filled), ext.maximal_cliques);
  CHECK(rc.exact);
  REQUIRE(rc.V);
  CHECK(phase_free_diff(rc.V->V, V) < 1e-10);

  GPartialMatrix half = f_map(V, ext.filled);
  half.set_diag(4, 2.0 * half.diag(4).real());
  CHECK_FALSE(recover_from_chordal(half, ext.maximal_cliques).exact);
}

TEST_CASE("recover_bf on an exact point and on a loose point") {
  std::mt19937_64 rng(44);
  const auto rc = testsupport::random_network(rng, testsupport::random_connected_graph(rng, 8, 0));
  const BranchFlowPoint x = g_map(f_map(rc.V0, Graph::from_network(rc.net)), rc.net);
  const RecoveryReport r = recover_bf(x, rc.net);
  CHECK(r.exact);
  REQUIRE(r.V);
  CHECK(phase_free_diff(r.V->V, rc.V0) < 1e-9);

  BranchFlowPoint loose = x;
  loose.ell[2] *= 1.5;
  const RecoveryReport rl = recover_bf(loose, rc.net);
  CHECK_FALSE(rl.exact);
  CHECK(rl.eig_ratio > 1e-3);

  nlohmann::json j = x;
  const BranchFlowPoint back = j.get<BranchFlowPoint>();
  CHECK(back.S == x.S);
  CHECK(back.ell == x.ell);
}

TEST_CASE("R2 and BF are exact on a tree with loss minimization") {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 3; ++trial) {
    const auto rc = testsupport::random_network(rng, testsupport::random_connected_graph(rng, 7, 0));
    const Comparison cmp = compare_relaxations(rc.net, CostSpec::loss_min());
    CHECK(cmp.ordering_ok);
    const auto& r1 = cmp.row(RelaxationKind::R1);
    const auto& r2 = cmp.row(RelaxationKind::R2);
    const auto& bf = cmp.row(RelaxationKind::BF);
    CHECK(r2.objective == doctest::Approx(r1.objective).epsilon(1e-6));
    CHECK(bf.objective == doctest::Approx(r2.objective).epsilon(1e-6));
  }
}

TEST_CASE("compare on case9 and the CSV line") {
  const CaseData c9 = load_case("case9");
  CompareOptions opt;
  opt.parallel = false;
  const Comparison cmp = compare_relaxations(c9.network, c9.cost, opt);
  CHECK(cmp.ordering_ok);
  CHECK(cmp.row(RelaxationKind::R1).recovery.exact);
  CHECK(cmp.row(RelaxationKind::R1).recovery.objective_gap_note < 1e-5);
  const std::string line = comparison_csv_row("case9", cmp);
  CHECK(line.rfind("case9,", 0) == 0);
  const std::string header = comparison_csv_header();
  CHECK(std::count(line.begin(), line.end(), ',') == std::count(header.begin(), header.end(), ','));
}

TEST_CASE("solve_report carries the solution and recovery") {
  const CaseData c9 = load_case("case9");
  const SolveOutcome out = solve_case(c9.network, c9.cost, RelaxationKind::R2);
  const nlohmann::json j = solve_report("case9", out);
  CHECK(j.at("case") == "case9");
  CHECK(j.at("status") == "optimal");
  CHECK(j.at("x").size() == j.at("variables").get<size_t>());
  const auto xs = j.at("x").get<std::vector<double>>();
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  const RecoveryReport again = recover_solution(c9.network, out.program, RelaxationKind::R2, x);
  CHECK(again.exact == out.recovery.exact);
}
