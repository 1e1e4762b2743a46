#pragma once
// Bundled model manifolds with boundary (interval, annulus, disk), their
// isometric finite group actions, fixed point strata, and the grid and
// collar conventions every later stage relies on.
//
// Collar convention: in each boundary chart the collar coordinate x_n is the
// distance to the boundary, so x_n >= 0 points inward.  On a radial chart
// with coordinate r this means x_n = r - r0 on an inner wall (xn_sign = +1)
// and x_n = r1 - r on an outer wall (xn_sign = -1); the conormal variable
// follows the same sign, xi_n = xn_sign * xi_r.

#include <functional>
#include <string>
#include <vector>

#include "gbvp/common.hpp"
#include "gbvp/crossed.hpp"

namespace gbvp {

enum class GeomKind { interval, annulus, disk };

struct Chart {
  std::string name;
  int dim = 1;
  std::vector<std::string> coords;
  std::vector<std::pair<double, double>> range;
  std::vector<bool> periodic;
  std::vector<RVec> nodes;  // tensor product grid, one node set per direction
  std::function<Eigen::MatrixXd(const RVec&)> metric;
};

// One boundary component, carried as a chart of X together with the collar
// data tying it to its parent chart of M.
struct BoundaryChart {
  std::string name;
  int parent = 0;         // chart index in Geometry::charts
  double boundary_value;  // value of the parent's radial coordinate there
  double xn_sign;         // d x_n / d r : +1 inner wall, -1 outer wall
  bool periodic = false;  // X component is a circle (else a point)
  RVec nodes;             // boundary parameter nodes; empty for a point
  double orient = 1.0;    // induced orientation relative to the parameter
};

struct Geometry {
  GeomKind kind = GeomKind::interval;
  std::vector<Chart> charts;
  std::vector<BoundaryChart> boundary;
  bool orient_m = true, orient_x = true, orient_fiber = true;
  double r0 = 0.0, r1 = 1.0;  // radial or interval endpoints
  int n_rad = 0, n_ang = 0;
  int dim() const { return charts.empty() ? 0 : charts[0].dim; }
};

struct GeometryDescriptor {
  std::string kind;  // "interval" | "annulus" | "disk"
  double r0 = 1.0, r1 = 2.0;
  int n_rad = 32, n_ang = 64;
};

// Throws ConfigError for an unknown kind, inner radius >= outer radius, or
// fewer than 4 nodes in any direction.
Geometry build_geometry(const GeometryDescriptor& d);

enum class ActionKind { trivial, rotation, reflection };

// Finite isometry group acting on a bundled geometry; the abstract group
// data lives in `group`, the geometric realization in the chart maps.
struct GroupAction {
  FiniteGroup group;
  ActionKind kind = ActionKind::trivial;
  std::vector<double> angle;  // rotation angle per element, radians
  // coordinates of (element . x) in the same chart, and the differential
  std::function<RVec(int, int, const RVec&)> map;
  std::function<Eigen::MatrixXd(int, int, const RVec&)> dmap;
};

GroupAction trivial_action(const Geometry& g);
// Z_k acting by rotations; requires an annulus or disk.
GroupAction rotation_action(const Geometry& g, int k);
// Z_2 acting by x -> r0 + r1 - x; requires the interval.
GroupAction reflection_action(const Geometry& g);

// Cotangent lift of one element: x -> (d gamma(x)^t)^{-1}, mapping the fiber
// over x to the fiber over gamma.x.  Composition law matches the group.
std::function<Eigen::MatrixXd(int, const RVec&)> codifferential_lift(
    const GroupAction& a, int gamma);

enum class StratumShape { full, point, empty };

// Fixed point stratum of one conjugacy class.
struct FixedStratum {
  int gamma = 0;
  std::vector<int> conj_class;
  std::vector<int> conjugators;  // z with class member = z gamma z^{-1}
  std::vector<int> centralizer;
  StratumShape m_shape = StratumShape::full;
  StratumShape x_shape = StratumShape::full;
  RVec point;           // coordinates (chart `point_chart`) when m is a point
  int point_chart = 0;
  Mat normal_m;         // action on the normal bundle of the fixed set in M
  Mat normal_x;         // same on the boundary side (0 x 0 when X^gamma = X or empty)
  double angle = 0.0;   // rotation angle on a 2-dim normal bundle
  std::vector<int> boundary_components;  // geometry boundary charts meeting the stratum
};

// One stratum per conjugacy class, identity class first.  Empty fixed point
// sets are returned explicitly with StratumShape::empty.
std::vector<FixedStratum> fixed_strata(const Geometry& g, const GroupAction& a);

}  // namespace gbvp
