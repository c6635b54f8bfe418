#include <doctest.h>

#include <set>

#include <nlohmann/json.hpp>

#include "opfrelax/graph.hpp"
#include "support.hpp"

using namespace opfrelax;

namespace {

bool is_clique(const Graph& g, const Clique& c) {
  for (size_t a = 0; a < c.size(); ++a)
    for (size_t b = a + 1; b < c.size(); ++b)
      if (!g.has_edge(c[a], c[b])) return false;
  return true;
}

// Brute-force chordality: every cycle of length >= 4 has a chord, checked by
// searching for chordless cycles through induced paths.
bool brute_chordal(const Graph& g) {
  const int n = g.n();
  for (int mask = 0; mask < (1 << n); ++mask) {
    std::vector<int> nodes;
    for (int v = 0; v < n; ++v)
      if (mask >> v & 1) nodes.push_back(v);
    if (nodes.size() < 4) continue;
    // induced subgraph is a chordless cycle iff connected and every node has degree 2
    bool all_two = true;
    for (int v : nodes) {
      int d = 0;
      for (int w : nodes) d += g.has_edge(v, w);
      if (d != 2) all_two = false;
    }
    if (!all_two) continue;
    Graph sub(static_cast<int>(nodes.size()));
    for (size_t a = 0; a < nodes.size(); ++a)
      for (size_t b = a + 1; b < nodes.size(); ++b)
        if (g.has_edge(nodes[a], nodes[b])) sub.add_edge(static_cast<int>(a), static_cast<int>(b));
    if (sub.connected()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("mcs order and PEO checks") {
  const Graph p = Graph::path(3);
  CHECK(is_perfect_elimination_ordering(p, mcs_order(p)));
  const Graph g2 = testsupport::chorded_pendant_cycle();
  CHECK(is_perfect_elimination_ordering(g2, mcs_order(g2)));
  const Graph c4 = Graph::cycle(4);
  CHECK_FALSE(is_perfect_elimination_ordering(c4, mcs_order(c4)));
}

TEST_CASE("is_chordal") {
  CHECK_FALSE(is_chordal(testsupport::pendant_cycle()));
  CHECK(is_chordal(testsupport::chorded_pendant_cycle()));
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) CHECK(is_chordal(testsupport::random_connected_graph(rng, 9, 0)));
}

TEST_CASE("is_chordal agrees with brute force on small random graphs") {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 200; ++k) {
    const int n = testsupport::uniform_int(rng, 4, 8);
    const Graph g = testsupport::random_connected_graph(rng, n, testsupport::uniform_int(rng, 0, 6));
    CHECK(is_chordal(g) == brute_chordal(g));
  }
}

TEST_CASE("chordal_extend examples") {
  const ChordalExtension e1 = chordal_extend(testsupport::pendant_cycle());
  REQUIRE(e1.fill_edges.size() == 1);
  const auto f = e1.fill_edges[0];
  CHECK(((f == std::pair{0, 2}) || (f == std::pair{1, 3})));
  CHECK(chordal_extend(Graph::path(6)).fill_edges.empty());
  CHECK(chordal_extend(Graph::complete(4)).fill_edges.empty());
}

TEST_CASE("chordal_extend invariants on random graphs") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    const int n = testsupport::uniform_int(rng, 3, 25);
    const Graph g = testsupport::random_connected_graph(rng, n, testsupport::uniform_int(rng, 0, 2 * n));
    const ChordalExtension ext = chordal_extend(g);
    CHECK(is_chordal(ext.filled));
    CHECK(ext.filled.contains(g));
    CHECK(ext.filled.m() == g.m() + static_cast<int>(ext.fill_edges.size()));
    CHECK(is_perfect_elimination_ordering(ext.filled, ext.peo));
    // cliques: cliques, not nested, cover every edge, at most n of them
    CHECK(static_cast<int>(ext.maximal_cliques.size()) <= n);
    for (const auto& c : ext.maximal_cliques) CHECK(is_clique(ext.filled, c));
    for (size_t a = 0; a < ext.maximal_cliques.size(); ++a)
      for (size_t b = 0; b < ext.maximal_cliques.size(); ++b) {
        if (a == b) continue;
        const auto& A = ext.maximal_cliques[a];
        const auto& B = ext.maximal_cliques[b];
        CHECK_FALSE(std::includes(B.begin(), B.end(), A.begin(), A.end()));
      }
    for (auto [u, v] : ext.filled.edges()) {
      bool covered = false;
      for (const auto& c : ext.maximal_cliques)
        covered |= std::binary_search(c.begin(), c.end(), u) && std::binary_search(c.begin(), c.end(), v);
      CHECK(covered);
    }
  }
}

TEST_CASE("maximal cliques examples") {
  const Graph g2 = testsupport::chorded_pendant_cycle();
  CHECK(maximal_cliques_from_peo(g2, mcs_order(g2)) == std::vector<Clique>{{0, 1, 2}, {0, 2, 3}, {3, 4}});
  const Graph p = Graph::path(3);
  CHECK(maximal_cliques_from_peo(p, mcs_order(p)) == std::vector<Clique>{{0, 1}, {1, 2}});
  const Graph k4 = Graph::complete(4);
  CHECK(maximal_cliques(complete_extension(k4)) == std::vector<Clique>{{0, 1, 2, 3}});
}

TEST_CASE("fundamental cycles") {
  CHECK(fundamental_cycles(Graph::path(5)).empty());
  const auto c1 = fundamental_cycles(testsupport::pendant_cycle());
  REQUIRE(c1.size() == 1);
  CHECK(std::set<int>(c1[0].begin(), c1[0].end()) == std::set<int>{0, 1, 2, 3});
  CHECK(fundamental_cycles(Graph::complete(4)).size() == 3);

  std::mt19937_64 rng(6);
  for (int k = 0; k < 50; ++k) {
    const int n = testsupport::uniform_int(rng, 3, 20);
    const Graph g = testsupport::random_connected_graph(rng, n, testsupport::uniform_int(rng, 0, n));
    const auto cycles = fundamental_cycles(g);
    CHECK(static_cast<int>(cycles.size()) == g.m() - n + 1);
    for (const auto& c : cycles)
      for (size_t a = 0; a < c.size(); ++a) CHECK(g.has_edge(c[a], c[(a + 1) % c.size()]));
  }
}

TEST_CASE("graph JSON round trip") {
  const Graph g = testsupport::chorded_pendant_cycle();
  nlohmann::json j = g;
  const Graph back = j.get<Graph>();
  CHECK(back.edges() == g.edges());
  CHECK_THROWS_AS(Graph(2).add_edge(1, 1), ModelError);
}
