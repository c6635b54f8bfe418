#include "opfrelax/graph.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "opfrelax/network.hpp"

namespace opfrelax {

Graph::Graph(int n, const std::vector<std::pair<int, int>>& edges) : adj_(n) {
  for (auto [u, v] : edges) add_edge(u, v);
}

Graph Graph::from_network(const Network& net) {
  Graph g(net.n());
  for (const auto& l : net.lines) g.add_edge(l.from, l.to);
  return g;
}

Graph Graph::complete(int n) {
  Graph g(n);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) g.add_edge(u, v);
  return g;
}

Graph Graph::path(int n) {
  Graph g(n);
  for (int u = 0; u + 1 < n; ++u) g.add_edge(u, u + 1);
  return g;
}

Graph Graph::cycle(int n) {
  Graph g = path(n);
  if (n > 2) g.add_edge(n - 1, 0);
  return g;
}

int Graph::m() const {
  std::size_t total = 0;
  for (const auto& a : adj_) total += a.size();
  return static_cast<int>(total / 2);
}

void Graph::add_edge(int u, int v) {
  if (u == v) throw ModelError("self-loop on node " + std::to_string(u));
  if (u < 0 || v < 0 || u >= n() || v >= n()) throw ModelError("edge endpoint out of range");
  auto insert = [](std::vector<int>& a, int x) {
    auto it = std::lower_bound(a.begin(), a.end(), x);
    if (it == a.end() || *it != x) a.insert(it, x);
  };
  insert(adj_[u], v);
  insert(adj_[v], u);
}

bool Graph::has_edge(int u, int v) const {
  return std::binary_search(adj_[u].begin(), adj_[u].end(), v);
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int u = 0; u < n(); ++u)
    for (int v : adj_[u])
      if (u < v) out.emplace_back(u, v);
  return out;
}

bool Graph::connected() const {
  if (n() == 0) return false;
  return static_cast<int>(bfs_tree(*this, 0).order.size()) == n();
}

bool Graph::contains(const Graph& other) const {
  if (other.n() != n()) return false;
  for (auto [u, v] : other.edges())
    if (!has_edge(u, v)) return false;
  return true;
}

SpanningTree bfs_tree(const Graph& g, int root) {
  SpanningTree t;
  t.parent.assign(g.n(), -1);
  std::vector<char> seen(g.n(), 0);
  std::queue<int> q;
  q.push(root);
  seen[root] = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    t.order.push_back(u);
    for (int v : g.neighbors(u)) {
      if (!seen[v]) {
        seen[v] = 1;
        t.parent[v] = u;
        q.push(v);
      }
    }
  }
  return t;
}

std::vector<int> mcs_order(const Graph& g) {
  const int n = g.n();
  std::vector<int> weight(n, 0);
  std::vector<char> numbered(n, 0);
  std::vector<int> visit;
  visit.reserve(n);
  for (int step = 0; step < n; ++step) {
    int best = -1;
    for (int v = 0; v < n; ++v)
      if (!numbered[v] && (best < 0 || weight[v] > weight[best])) best = v;
    numbered[best] = 1;
    visit.push_back(best);
    for (int w : g.neighbors(best))
      if (!numbered[w]) ++weight[w];
  }
  std::reverse(visit.begin(), visit.end());
  return visit;
}

bool is_perfect_elimination_ordering(const Graph& g, const std::vector<int>& order) {
  const int n = g.n();
  if (static_cast<int>(order.size()) != n) return false;
  std::vector<int> pos(n, -1);
  for (int k = 0; k < n; ++k) {
    if (order[k] < 0 || order[k] >= n || pos[order[k]] >= 0) return false;
    pos[order[k]] = k;
  }
  for (int k = 0; k < n; ++k) {
    const int v = order[k];
    std::vector<int> later;
    for (int w : g.neighbors(v))
      if (pos[w] > k) later.push_back(w);
    for (std::size_t a = 0; a < later.size(); ++a)
      for (std::size_t b = a + 1; b < later.size(); ++b)
        if (!g.has_edge(later[a], later[b])) return false;
  }
  return true;
}

bool is_chordal(const Graph& g) { return is_perfect_elimination_ordering(g, mcs_order(g)); }

std::vector<Clique> maximal_cliques_from_peo(const Graph& chordal, const std::vector<int>& peo) {
  const int n = chordal.n();
  std::vector<int> pos(n);
  for (int k = 0; k < n; ++k) pos[peo[k]] = k;
  std::vector<Clique> candidates;
  for (int k = 0; k < n; ++k) {
    const int v = peo[k];
    Clique c{v};
    for (int w : chordal.neighbors(v))
      if (pos[w] > k) c.push_back(w);
    std::sort(c.begin(), c.end());
    candidates.push_back(std::move(c));
  }
  std::vector<Clique> out;
  for (std::size_t a = 0; a < candidates.size(); ++a) {
    bool contained = false;
    for (std::size_t b = 0; b < candidates.size() && !contained; ++b) {
      if (a == b || candidates[b].size() < candidates[a].size()) continue;
      if (candidates[b].size() == candidates[a].size() && b > a) continue;  // keep one of equal sets
      contained = std::includes(candidates[b].begin(), candidates[b].end(), candidates[a].begin(),
                                candidates[a].end());
    }
    if (!contained) out.push_back(candidates[a]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Clique> maximal_cliques(const ChordalExtension& ext) {
  return maximal_cliques_from_peo(ext.filled, ext.peo);
}

ChordalExtension chordal_extend(const Graph& g) {
  const int n = g.n();
  ChordalExtension ext;
  ext.base = g;
  ext.filled = g;
  std::vector<std::set<int>> work(n);
  for (int u = 0; u < n; ++u) work[u].insert(g.neighbors(u).begin(), g.neighbors(u).end());
  std::vector<char> eliminated(n, 0);
  for (int step = 0; step < n; ++step) {
    int best = -1;
    for (int v = 0; v < n; ++v) {
      if (eliminated[v]) continue;
      if (best < 0 || work[v].size() < work[best].size()) best = v;
    }
    const std::vector<int> nbrs(work[best].begin(), work[best].end());
    for (std::size_t a = 0; a < nbrs.size(); ++a) {
      for (std::size_t b = a + 1; b < nbrs.size(); ++b) {
        const int u = nbrs[a], w = nbrs[b];
        if (!ext.filled.has_edge(u, w)) {
          ext.filled.add_edge(u, w);
          ext.fill_edges.emplace_back(std::min(u, w), std::max(u, w));
        }
        work[u].insert(w);
        work[w].insert(u);
      }
    }
    for (int u : nbrs) work[u].erase(best);
    work[best].clear();
    eliminated[best] = 1;
    ext.peo.push_back(best);
  }
  std::sort(ext.fill_edges.begin(), ext.fill_edges.end());
  ext.maximal_cliques = maximal_cliques(ext);
  return ext;
}

ChordalExtension complete_extension(const Graph& g) {
  ChordalExtension ext;
  ext.base = g;
  ext.filled = Graph::complete(g.n());
  for (auto e : ext.filled.edges())
    if (!g.has_edge(e.first, e.second)) ext.fill_edges.push_back(e);
  for (int v = 0; v < g.n(); ++v) ext.peo.push_back(v);
  ext.maximal_cliques = maximal_cliques(ext);
  return ext;
}

std::vector<Cycle> fundamental_cycles(const Graph& g) {
  const SpanningTree tree = bfs_tree(g, 0);
  std::vector<int> depth(g.n(), 0);
  for (int v : tree.order)
    if (tree.parent[v] >= 0) depth[v] = depth[tree.parent[v]] + 1;
  std::vector<Cycle> cycles;
  for (auto [u, v] : g.edges()) {
    if (tree.parent[u] == v || tree.parent[v] == u) continue;
    // Walk both ends up to the lowest common ancestor.
    std::vector<int> left{u}, right{v};
    int a = u, b = v;
    while (a != b) {
      if (depth[a] >= depth[b]) {
        a = tree.parent[a];
        left.push_back(a);
      } else {
        b = tree.parent[b];
        right.push_back(b);
      }
    }
    // left ends with lca and right ends with lca: drop the duplicate.
    right.pop_back();
    Cycle c = left;
    c.insert(c.end(), right.rbegin(), right.rend());
    cycles.push_back(std::move(c));
  }
  return cycles;
}

void to_json(nlohmann::json& j, const Graph& g) {
  j = nlohmann::json{{"n", g.n()}, {"edges", nlohmann::json::array()}};
  for (auto [u, v] : g.edges()) j["edges"].push_back({u, v});
}

void from_json(const nlohmann::json& j, Graph& g) {
  g = Graph(j.at("n").get<int>());
  for (const auto& e : j.at("edges")) g.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
}

}  // namespace opfrelax
