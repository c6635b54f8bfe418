// Test-only helpers: seeded random instances and oracles that do not go
// through the library code they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "opfrelax/graph.hpp"
#include "opfrelax/network.hpp"
#include "opfrelax/partial_matrix.hpp"

namespace testsupport {

using opfrelax::Complex;
using opfrelax::Graph;
using opfrelax::Network;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline std::vector<Complex> random_voltages(std::mt19937_64& rng, int n, double mag_lo = 0.5, double mag_hi = 1.5) {
  std::vector<Complex> V(n);
  for (auto& v : V) v = std::polar(uniform(rng, mag_lo, mag_hi), uniform(rng, -M_PI, M_PI));
  return V;
}

/// Random spanning tree (each node attaches to an earlier one) plus `extra`
/// random chords.
inline Graph random_connected_graph(std::mt19937_64& rng, int n, int extra) {
  Graph g(n);
  for (int v = 1; v < n; ++v) g.add_edge(uniform_int(rng, 0, v - 1), v);
  const int max_edges = n * (n - 1) / 2;
  for (int k = 0; k < extra && g.m() < max_edges; ++k) {
    int u = uniform_int(rng, 0, n - 1), v = uniform_int(rng, 0, n - 1);
    while (u == v || g.has_edge(u, v)) {
      u = uniform_int(rng, 0, n - 1);
      v = uniform_int(rng, 0, n - 1);
    }
    g.add_edge(u, v);
  }
  return g;
}

/// Network on g with positive resistances whose bounds contain the injections
/// and magnitudes of a known voltage profile V0.
struct RandomCase {
  Network net;
  std::vector<Complex> V0;
};

inline RandomCase random_network(std::mt19937_64& rng, const Graph& g) {
  RandomCase rc;
  Network& net = rc.net;
  const int n = g.n();
  net.buses.resize(n);
  net.bus_ids.resize(n);
  std::iota(net.bus_ids.begin(), net.bus_ids.end(), 1);
  for (auto [u, v] : g.edges()) {
    const Complex z{uniform(rng, 0.01, 0.08), uniform(rng, 0.05, 0.4)};
    if (uniform(rng, 0.0, 1.0) < 0.5)
      net.lines.push_back(Network::make_line(u, v, z));
    else
      net.lines.push_back(Network::make_line(v, u, z));
  }
  rc.V0.resize(n);
  rc.V0[0] = 1.0;
  for (int j = 1; j < n; ++j) rc.V0[j] = std::polar(uniform(rng, 0.96, 1.04), uniform(rng, -0.15, 0.15));
  const auto s0 = opfrelax::injections(net, rc.V0);
  for (int j = 0; j < n; ++j) {
    auto& b = net.buses[j];
    const bool gen = j == 0 || uniform(rng, 0.0, 1.0) < 0.4;
    b.has_generator = gen;
    b.v_min = j == 0 ? 1.0 : 0.9;
    b.v_max = j == 0 ? 1.0 : 1.1;
    if (gen) {
      b.s_min = s0[j] - Complex(uniform(rng, 0.2, 1.0), uniform(rng, 0.2, 1.0));
      b.s_max = s0[j] + Complex(uniform(rng, 0.2, 1.0), uniform(rng, 0.2, 1.0));
    } else {
      // fixed real demand, small reactive band
      b.s_min = s0[j] - Complex(0.0, 0.05);
      b.s_max = s0[j] + Complex(0.0, 0.05);
    }
  }
  net.validate();
  return rc;
}

/// Dense bus admittance matrix assembled from the pi model of each branch.
inline Eigen::MatrixXcd ybus(const Network& net) {
  const int n = net.n();
  Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& l : net.lines) {
    const Complex ys = 1.0 / l.z;
    const Complex bc{0.0, l.b_charge / 2.0};
    const Complex t = l.tap;
    Y(l.from, l.from) += (ys + bc) / std::norm(t);
    Y(l.to, l.to) += ys + bc;
    Y(l.from, l.to) += -ys / std::conj(t);
    Y(l.to, l.from) += -ys / t;
  }
  return Y;
}

/// s = diag(V) conj(Y V) plus |V_j|^2 conj(y_shunt).
inline std::vector<Complex> oracle_injections(const Network& net, const std::vector<Complex>& V) {
  const int n = net.n();
  Eigen::VectorXcd v(n);
  for (int j = 0; j < n; ++j) v(j) = V[j];
  const Eigen::VectorXcd I = ybus(net) * v;
  std::vector<Complex> s(n);
  for (int j = 0; j < n; ++j) s[j] = V[j] * std::conj(I(j)) + std::norm(V[j]) * std::conj(net.buses[j].y_shunt);
  return s;
}

/// Random Hermitian PSD matrix of the given rank.
inline Eigen::MatrixXcd random_psd(std::mt19937_64& rng, int n, int rank) {
  Eigen::MatrixXcd B(n, rank);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < rank; ++k) B(i, k) = Complex(uniform(rng, -1, 1), uniform(rng, -1, 1));
  return B * B.adjoint();
}

/// max_jk |A(j,k) - B(j,k)|
inline double max_abs_diff(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
  return (A - B).cwiseAbs().maxCoeff();
}

/// Removes the global phase so that the first nonzero entry is real positive.
inline std::vector<Complex> dephase(std::vector<Complex> V) {
  for (const auto& v : V)
    if (std::abs(v) > 0.0) {
      const Complex r = std::conj(v) / std::abs(v);
      for (auto& w : V) w *= r;
      break;
    }
  return V;
}

inline double max_abs_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double d = 0.0;
  for (size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

/// Largest entrywise difference of two partial matrices on the same pattern.
inline double max_abs_diff(const opfrelax::GPartialMatrix& A, const opfrelax::GPartialMatrix& B) {
  double d = 0.0;
  for (int j = 0; j < A.n(); ++j) d = std::max(d, std::abs(A.diag(j) - B.diag(j)));
  for (auto [u, v] : A.graph().edges()) {
    d = std::max(d, std::abs(A.at(u, v) - B.at(u, v)));
    d = std::max(d, std::abs(A.at(v, u) - B.at(v, u)));
  }
  return d;
}

/// 4-cycle 0-1-2-3 with pendant 4 on node 3.
inline Graph pendant_cycle() { return Graph(5, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {3, 4}}); }
/// The same graph plus the chord 0-2.
inline Graph chorded_pendant_cycle() { return Graph(5, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {3, 4}, {0, 2}}); }

}  // namespace testsupport
