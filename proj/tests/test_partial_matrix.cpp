#include <doctest.h>

#include "opfrelax/partial_matrix.hpp"
#include "opfrelax/recovery.hpp"
#include "support.hpp"

using namespace opfrelax;
using testsupport::max_abs_diff;

namespace {

GPartialMatrix one_edge(double off) {
  GPartialMatrix W(Graph(2, {{0, 1}}));
  W.set_diag(0, 1.0);
  W.set_diag(1, 1.0);
  W.set_hermitian(0, 1, off);
  return W;
}

GPartialMatrix triangle(double a, double b, double c) {
  GPartialMatrix W(Graph::cycle(3));
  for (int j = 0; j < 3; ++j) W.set_diag(j, 1.0);
  W.set_hermitian(0, 1, std::polar(1.0, a));
  W.set_hermitian(1, 2, std::polar(1.0, b));
  W.set_hermitian(2, 0, std::polar(1.0, c));
  return W;
}

double min_eig(const Eigen::MatrixXcd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

TEST_CASE("from_full") {
  const GPartialMatrix I = from_full(HermitianMatrix::identity(3), Graph::cycle(3));
  for (int j = 0; j < 3; ++j) CHECK(I.diag(j) == Complex(1.0));
  CHECK(I.at(0, 1) == Complex(0.0));

  const std::vector<Complex> v{1.0, 1.0, 1.0};
  const GPartialMatrix P = from_full(HermitianMatrix::outer(v), Graph::path(3));
  CHECK(P.at(0, 1) == Complex(1.0));
  CHECK(P.at(2, 1) == Complex(1.0));
  CHECK_THROWS_AS(P.at(0, 2), ModelError);

  std::mt19937_64 rng(1);
  const HermitianMatrix W(testsupport::random_psd(rng, 5, 3));
  const GPartialMatrix full = from_full(W, Graph::complete(5));
  CHECK(max_abs_diff(chordal_psd_complete(full, 1e-9).dense(), W.dense()) == 0.0);
}

TEST_CASE("PSD and rank-one predicates on one edge") {
  const auto cl = edge_cliques(Graph(2, {{0, 1}}));
  CHECK(is_psd_partial(one_edge(0.5), cl, 1e-12));
  CHECK_FALSE(is_psd_partial(one_edge(2.0), cl, 1e-12));
  CHECK_FALSE(is_rank1_partial(one_edge(0.0), cl, 1e-9));
  for (double phi : {0.0, 0.7, -2.0, 3.0}) {
    GPartialMatrix W(Graph(2, {{0, 1}}));
    W.set_diag(0, 1.0);
    W.set_diag(1, 1.0);
    W.set_hermitian(0, 1, std::polar(1.0, phi));
    CHECK(is_rank1_partial(W, cl, 1e-9));
  }
}

TEST_CASE("f(V) lies in the rank-one set") {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 50; ++k) {
    const int n = testsupport::uniform_int(rng, 2, 12);
    const Graph g = testsupport::random_connected_graph(rng, n, testsupport::uniform_int(rng, 0, n));
    const auto V = testsupport::random_voltages(rng, n);
    const GPartialMatrix W = f_map(V, g);
    const auto cl = edge_cliques(g);
    CHECK(is_psd_partial(W, cl, 1e-12));
    CHECK(is_rank1_partial(W, cl, 1e-9));
    CHECK(cycle_residual(W, fundamental_cycles(g)) < 1e-12);
    const ChordalExtension ext = chordal_extend(g);
    CHECK(is_psd_partial(f_map(V, ext.filled), ext.maximal_cliques, 1e-12));
  }
}

TEST_CASE("cycle residual examples") {
  const auto cycles = fundamental_cycles(Graph::cycle(3));
  CHECK(cycle_residual(triangle(kPi / 3, kPi / 3, kPi / 3), cycles) == doctest::Approx(kPi));
  CHECK(cycle_residual(triangle(kPi / 3, kPi / 3, -2 * kPi / 3), cycles) < 1e-12);
  GPartialMatrix zero = triangle(0, 0, 0);
  zero.set_hermitian(0, 1, 0.0);
  CHECK_THROWS_AS(cycle_residual(zero, cycles), CompletionError);
}

TEST_CASE("rank1_complete examples") {
  GPartialMatrix ones(Graph::path(4));
  for (int j = 0; j < 4; ++j) ones.set_diag(j, 1.0);
  for (auto [u, v] : ones.graph().edges()) ones.set_hermitian(u, v, 1.0);
  CHECK(max_abs_diff(rank1_complete(ones, 1e-9).dense(), Eigen::MatrixXcd::Ones(4, 4)) < 1e-15);

  CHECK_THROWS_WITH_AS(rank1_complete(triangle(kPi / 3, kPi / 3, kPi / 3), 1e-9),
                       doctest::Contains("cycle condition violated"), CompletionError);
  CHECK_THROWS_WITH_AS(rank1_complete(one_edge(0.0), 1e-9), doctest::Contains("(0,1)"), CompletionError);
}

TEST_CASE("rank1_complete is path independent") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 30; ++k) {
    const int n = testsupport::uniform_int(rng, 3, 10);
    const Graph g = testsupport::random_connected_graph(rng, n, n);
    const auto V = testsupport::random_voltages(rng, n);
    const GPartialMatrix W = f_map(V, g);
    const auto rec = rank1_voltages(W, 1e-9);
    // theta differences along every edge, not only tree edges
    for (auto [u, v] : g.edges())
      CHECK(std::abs(wrap_angle(std::arg(rec[u] * std::conj(rec[v])) - std::arg(W.at(u, v)))) < 1e-9);
  }
}

TEST_CASE("chordal_psd_complete examples") {
  GPartialMatrix P(Graph::path(3));
  for (int j = 0; j < 3; ++j) P.set_diag(j, 1.0);
  P.set_hermitian(0, 1, 1.0);
  P.set_hermitian(1, 2, 1.0);
  CHECK(max_abs_diff(chordal_psd_complete(P, 1e-9).dense(), Eigen::MatrixXcd::Ones(3, 3)) < 1e-12);

  P.set_hermitian(0, 1, 0.0);
  P.set_hermitian(1, 2, 0.0);
  CHECK(max_abs_diff(chordal_psd_complete(P, 1e-9).dense(), Eigen::MatrixXcd::Identity(3, 3)) < 1e-12);

  CHECK_THROWS_WITH_AS(chordal_psd_complete(GPartialMatrix(Graph::cycle(4)), 1e-9),
                       doctest::Contains("non-chordal"), CompletionError);
  GPartialMatrix bad(Graph::path(3));
  for (int j = 0; j < 3; ++j) bad.set_diag(j, 1.0);
  bad.set_hermitian(0, 1, 2.0);
  CHECK_THROWS_WITH_AS(chordal_psd_complete(bad, 1e-9), "clique PSD violation", CompletionError);
}

TEST_CASE("chordal_psd_complete on a chorded cycle from a rank-one restriction") {
  std::mt19937_64 rng(8);
  const Graph g2 = testsupport::chorded_pendant_cycle();
  for (int k = 0; k < 20; ++k) {
    const auto v = testsupport::random_voltages(rng, 5);
    const GPartialMatrix W = f_map(v, g2);
    const HermitianMatrix full = chordal_psd_complete(W, 1e-9);
    CHECK(min_eig(full.dense()) >= -1e-9);
    for (auto [a, b] : g2.edges()) CHECK(full(a, b) == W.at(a, b));
  }
}

TEST_CASE("clique PSD implies edge PSD") {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 50; ++k) {
    const int n = testsupport::uniform_int(rng, 3, 9);
    const Graph g = testsupport::random_connected_graph(rng, n, n);
    const ChordalExtension ext = chordal_extend(g);
    const HermitianMatrix W(testsupport::random_psd(rng, n, testsupport::uniform_int(rng, 1, n)));
    const GPartialMatrix Wch = from_full(W, ext.filled);
    REQUIRE(is_psd_partial(Wch, ext.maximal_cliques, 1e-10));
    CHECK(is_psd_partial(Wch, edge_cliques(ext.filled), 1e-10));
  }
}

TEST_CASE("HermitianMatrix basics") {
  Eigen::MatrixXcd a(2, 2);
  a << 1.0, Complex(0.0, 2.0), Complex(0.0, 0.0), 3.0;
  const HermitianMatrix h(a);
  CHECK(h(0, 1) == std::conj(h(1, 0)));
  const std::vector<Complex> v{Complex(1.0, 1.0), Complex(0.0, 2.0)};
  const auto ev = HermitianMatrix::outer(v).eigenvalues();
  CHECK(ev(1) == doctest::Approx(6.0));
  CHECK(std::abs(ev(0)) < 1e-12);
}
