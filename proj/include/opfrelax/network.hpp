#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "opfrelax/types.hpp"

namespace opfrelax {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Bus {
  // Net injection bounds (generation minus load), componentwise on (p, q).
  Complex s_min{-kInf, -kInf};
  Complex s_max{kInf, kInf};
  double v_min = 0.9;
  double v_max = 1.1;
  Complex y_shunt{0.0, 0.0};
  // Fixed demand folded into the injection bounds; kept for serialization.
  Complex load{0.0, 0.0};
  bool has_generator = false;
};

struct Line {
  int from = 0;
  int to = 0;
  Complex z{0.0, 0.0};
  Complex y{0.0, 0.0};
  Complex tap{1.0, 0.0};
  double b_charge = 0.0;

  bool plain() const { return tap == Complex(1.0, 0.0); }
};

/// How the bus shunt enters the injection: physical s = |V|^2 y^H, or the
/// unconjugated |V|^2 y form some texts display.
enum class ShuntConvention { Conjugated, AsDisplayed };

/// Two-port admittances of a line in the standard pi model with tap on the
/// from side: I_f = yff V_f + yft V_t, I_t = ytf V_f + ytt V_t.
struct TwoPort {
  Complex yff, yft, ytf, ytt;
};

class Network {
 public:
  int n() const { return static_cast<int>(buses.size()); }
  int m() const { return static_cast<int>(lines.size()); }

  /// Builds a line from its impedance, keeping y = 1/z.
  static Line make_line(int from, int to, Complex z, Complex tap = {1.0, 0.0},
                        double b_charge = 0.0);

  /// Throws ModelError when the network breaks a structural invariant
  /// (self-loop, duplicate pair, islanding, bad bounds, y*z != 1).
  void validate() const;

  bool connected() const;
  bool tap_free() const;

  /// Line index for an unordered bus pair, or -1.
  int find_line(int a, int b) const;

  std::vector<std::pair<int, int>> edges() const;

  int slack = 0;
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  // Original bus identifiers (MATPOWER bus_i), index-aligned with buses.
  std::vector<int> bus_ids;
  ShuntConvention shunt_convention = ShuntConvention::Conjugated;
};

TwoPort two_port(const Line& line);

/// Shunt coefficient multiplying |V_j|^2 in s_j under the network's convention.
Complex shunt_coefficient(const Network& net, int j);

enum class CostKind { LossMin, WeightedGen, Directional };

/// Objective over net injections.
///   LossMin:     sum_j Re s_j
///   WeightedGen: sum_j linear_j (Re s_j + demand_j) + quadratic_j (Re s_j + demand_j)^2 + constant
///   Directional: sum_j p_weight_j Re s_j + q_weight_j Im s_j   (projection sweeps)
struct CostSpec {
  CostKind kind = CostKind::LossMin;
  std::vector<double> linear;
  std::vector<double> quadratic;
  std::vector<double> demand;
  std::vector<double> p_weight;
  std::vector<double> q_weight;
  double constant = 0.0;

  static CostSpec loss_min() { return {}; }
  static CostSpec directional(int n, int bus_a, double wa, int bus_b, double wb, bool reactive);
  void validate(int n) const;
  bool has_quadratic() const;
};

/// s_j for a voltage vector (generalized branch model plus shunt).
Complex injection(const Network& net, std::span<const Complex> V, int j);
std::vector<Complex> injections(const Network& net, std::span<const Complex> V);

/// Bounds of injections and voltage magnitudes hold within tol.
bool check_feasible(const Network& net, std::span<const Complex> V, double tol);

/// Cost of a voltage profile (the objective a rank-1 relaxation point reports).
double evaluate_cost(const Network& net, const CostSpec& cost, std::span<const Complex> V);

/// Adds eps to the resistance of every line with Re z == 0.
Network fix_zero_resistance(Network net, double eps);

void to_json(nlohmann::json& j, const Network& net);
void from_json(const nlohmann::json& j, Network& net);
void to_json(nlohmann::json& j, const CostSpec& cost);
void from_json(const nlohmann::json& j, CostSpec& cost);

}  // namespace opfrelax
