#pragma once

#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace opfrelax {

class Network;

/// Simple undirected graph on nodes 0..n-1 with sorted adjacency lists.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int n) : adj_(n) {}
  Graph(int n, const std::vector<std::pair<int, int>>& edges);

  static Graph from_network(const Network& net);
  static Graph complete(int n);
  static Graph path(int n);
  static Graph cycle(int n);

  int n() const { return static_cast<int>(adj_.size()); }
  int m() const;

  /// Adds {u, v}; duplicates are ignored, self-loops rejected.
  void add_edge(int u, int v);
  bool has_edge(int u, int v) const;
  const std::vector<int>& neighbors(int u) const { return adj_[u]; }

  /// Edges as (min, max) pairs in lexicographic order.
  std::vector<std::pair<int, int>> edges() const;
  bool connected() const;
  bool is_tree() const { return connected() && m() == n() - 1; }
  bool contains(const Graph& other) const;

 private:
  std::vector<std::vector<int>> adj_;
};

using Cycle = std::vector<int>;
using Clique = std::vector<int>;

struct ChordalExtension {
  Graph base;
  Graph filled;
  std::vector<std::pair<int, int>> fill_edges;
  std::vector<int> peo;
  std::vector<Clique> maximal_cliques;
};

/// Maximum cardinality search. The returned order is reversed visit order, so
/// on a chordal graph it is a perfect elimination ordering.
std::vector<int> mcs_order(const Graph& g);

/// For each node in order, its later-ordered neighbours form a clique.
bool is_perfect_elimination_ordering(const Graph& g, const std::vector<int>& order);

bool is_chordal(const Graph& g);

/// Greedy minimum-degree elimination (ties: lowest index).
ChordalExtension chordal_extend(const Graph& g);

/// Extension by the complete graph on the same nodes.
ChordalExtension complete_extension(const Graph& g);

/// Maximal cliques of ext.filled from its PEO, each sorted, list sorted
/// lexicographically.
std::vector<Clique> maximal_cliques(const ChordalExtension& ext);
std::vector<Clique> maximal_cliques_from_peo(const Graph& chordal, const std::vector<int>& peo);

/// One cycle per non-tree edge of a BFS spanning tree rooted at node 0. Each
/// cycle lists nodes in traversal order; consecutive nodes (and last-first)
/// are adjacent.
std::vector<Cycle> fundamental_cycles(const Graph& g);

/// BFS tree parents from root (parent[root] = -1) and visit order.
struct SpanningTree {
  std::vector<int> parent;
  std::vector<int> order;
};
SpanningTree bfs_tree(const Graph& g, int root = 0);

void to_json(nlohmann::json& j, const Graph& g);
void from_json(const nlohmann::json& j, Graph& g);

}  // namespace opfrelax
