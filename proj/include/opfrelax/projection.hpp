#pragma once

#include <string>
#include <vector>

#include "opfrelax/conic.hpp"
#include "opfrelax/network.hpp"
#include "opfrelax/recovery.hpp"
#include "opfrelax/relaxations.hpp"

namespace opfrelax {

enum class Plane { P1P2, Q1Q2 };

const char* plane_name(Plane p);
Plane parse_plane(const std::string& s);

/// Equality pin on a bus: |V|^2, p or q.
struct Pin {
  enum class Kind { Magnitude, P, Q };
  Kind kind = Kind::Magnitude;
  int bus = 0;
  double value = 0.0;
};

/// Pins W11 = W22 = W33 = 1 and p3 = -0.95.
std::vector<Pin> three_bus_pins();

/// Copy of net with the pins turned into fixed bounds.
Network apply_pins(Network net, const std::vector<Pin>& pins);

struct ProjectionSpec {
  Plane plane = Plane::P1P2;
  std::vector<Pin> pins = three_bus_pins();
  int bus_a = 0;
  int bus_b = 1;
  int directions = 16;  // >= 4
  int grid = 256;       // >= 16

  void validate(int n) const;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator<(const Point2& a, const Point2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }
  friend bool operator==(const Point2& a, const Point2& b) { return a.x == b.x && a.y == b.y; }
};

struct SweepPoint {
  double phi = 0.0;  // direction (cos phi, sin phi), minimized
  Point2 point;
  double objective = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  RecoveryReport recovery;
};

/// Supporting points of the projected relaxation: for each direction d_k,
/// minimize d_k . (x, y) and report the optimizer's projection. Sorted by phi.
std::vector<SweepPoint> project_convex(const Network& net, const ProjectionSpec& spec, RelaxationKind which,
                                       const SolverSettings& settings = {});

/// Grid over the two free angles of a three-bus network with all magnitudes
/// pinned. Injection pins hold within half a grid cell (scaled by slack_scale).
std::vector<Point2> project_nonconvex(const Network& net, const ProjectionSpec& spec, double slack_scale = 1.0);

/// Same grid over the independent edge angles: edge-wise rank one, no cycle condition.
std::vector<Point2> project_W2nc(const Network& net, const ProjectionSpec& spec, double slack_scale = 1.0);

/// Non-dominated points under minimization of both coordinates, sorted by x.
std::vector<Point2> pareto_front(std::vector<Point2> pts);

/// 8-connected components of the occupied cells of a res x res raster over
/// the bounding box of pts.
int count_components(const std::vector<Point2>& pts, int res);

/// Connected components of the raster cells left empty, counted with
/// 4-connectivity on a one-cell border: 1 (the outside) plus the holes.
int count_complement_components(const std::vector<Point2>& pts, int res);

std::string points_csv(const std::vector<Point2>& pts, Plane plane);
std::string sweep_csv(const std::vector<SweepPoint>& pts, Plane plane);

}  // namespace opfrelax
