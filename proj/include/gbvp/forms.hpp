#pragma once
// Sampled differential forms on tensor-product grids, the cone complex of a
// manifold whose boundary fibers over X, and the fundamental-class pairing
//   <(w, w_X), [M, pi]> = int_M w + int_X w_X.
//
// A base is a single chart: an ordered axis list (base coordinates first,
// cotangent coordinates after) plus ncomp disjoint identical copies, one per
// boundary component.  Every base is oriented by its stored axis order, and
// the fiber of pi is oriented by increasing coordinate.  Compact support is
// declared as a radius in the cotangent (fiber-kind) axes; coefficients must
// vanish on the outermost grid shells of those axes.
//
// Derivatives are spectral on periodic axes and order-8 finite differences on
// the others, so the discrete d o d vanishes identically on tensor grids.
//
// Cone convention, fixed once and exercised by the Stokes and sign tests:
// a degree-j cochain holds (w on M of degree j, w_X on X of degree j-nu-1)
// and the differential is (dw, -pi_* i^* w + (-1)^(nu+1) dw_X).  The shift by
// nu+1 (not nu) and the sign on dw_X are forced together by "the differential
// squares to zero", the Leibniz rule, and Stokes for the pairing; fiber
// integration pulls the fiber differential to the front of the multi-index,
// and the per-wall factors inside the cone's pi_* come from the induced
// boundary orientation, which makes the pairing of an exact cochain vanish.

#include <functional>
#include <string>
#include <vector>

#include "gbvp/common.hpp"

namespace gbvp {

enum class AxisKind { periodic, line, fiber };

// periodic axes omit the right endpoint; line and fiber axes include both
struct Axis {
  std::string name;
  AxisKind kind = AxisKind::line;
  double lo = 0.0;
  double hi = 1.0;
  int n = 0;

  double step() const;
  double node(int i) const;
};

struct FormBase {
  std::string tag;
  int ncomp = 1;
  std::vector<Axis> axes;

  int dim() const { return static_cast<int>(axes.size()); }
  long chart_points() const;
  long points() const;  // ncomp * chart_points
  bool same_layout(const FormBase& o) const;  // shapes only, tags ignored
};

// increasing multi-indices of length j over axes 0..dim-1, lexicographic
int binom(int n, int k);
std::vector<std::vector<int>> multi_indices(int dim, int j);
int multi_rank(int dim, const std::vector<int>& idx);

// flat storage: component slowest, then axes in order
long flat_index(const FormBase& b, int comp, const std::vector<int>& iv);

// quadrature weights in the stored coordinate: uniform on periodic axes,
// order-6 Gregory end corrections on line and fiber axes
Eigen::VectorXd quad_weights(const Axis& a);

struct GradedForm {
  FormBase base;
  // deg[j][c]: grid coefficients of the c-th increasing multi-index in degree
  // j; an empty vector means identically zero
  std::vector<std::vector<Vec>> deg;
  bool compact = false;
  double support = 0.0;

  static GradedForm zero(const FormBase& b);

  Vec& at(int j, int c);             // allocates zeros on first touch
  const Vec& get(int j, int c) const;
  bool has(int j, int c) const;
  int top() const;                   // highest nonzero degree, -1 if zero
  double max_norm() const;
  void prune(double tol);
};

GradedForm operator+(const GradedForm& a, const GradedForm& b);
GradedForm operator-(const GradedForm& a, const GradedForm& b);
GradedForm operator*(const cplx& s, const GradedForm& w);

// sample a scalar over the grid: f(component, coordinates)
Vec grid_sample(const FormBase& b,
                const std::function<cplx(int, const RVec&)>& f);

GradedForm exterior_derivative(const GradedForm& w);

// graded wedge product; both factors must live on the same base
GradedForm wedge_forms(const GradedForm& a, const GradedForm& b);

// integral of the top-degree slot in the stored orientation, summed over
// components; lower degrees do not contribute
cplx integrate_top(const GradedForm& w);

// largest coefficient magnitude on the outermost shells of the fiber axes
double support_defect(const GradedForm& w);

// integration along one fiber-kind axis (the fiber differential is pulled to
// the front of the multi-index); comp_sign holds one orientation factor per
// base component, default +1 = increasing coordinate
GradedForm fiber_integration(const GradedForm& w, int axis,
                             std::vector<double> comp_sign = {});

// restriction to wall slices of a line axis; at_hi picks the low (0) or high
// (1) wall per output component, and the slices stack as base components
GradedForm restrict_boundary(const GradedForm& w, int collar_axis,
                             const std::vector<int>& at_hi,
                             const std::string& tag);

// ties an M-side base to an X-side base: slicing away collar_axis and
// integrating out conormal_axis must reproduce the X-side layout
struct Fibration {
  int collar_axis = 0;
  int conormal_axis = 0;
  std::vector<int> at_hi;  // per X component: 0 = low wall, 1 = high wall
};

struct ConeCochain {
  GradedForm m_part;  // on T*M^gamma
  GradedForm x_part;  // on T*X^gamma, degrees shifted down by nu + 1
  Fibration fib;
  int nu = 1;         // dimension of the fiber of pi
};

// equal-degree pair with i^* m = pi^* x on the walls
struct CompatiblePair {
  GradedForm m_part;
  GradedForm x_part;
  Fibration fib;
};

// max norm of i^* m - pi^* x over the wall grid
double compatibility_defect(const GradedForm& m, const GradedForm& x,
                            const Fibration& fib);

ConeCochain cone_differential(const ConeCochain& c);

// componentwise differential of a compatible pair (preserves compatibility)
CompatiblePair pair_differential(const CompatiblePair& p);

// cone module products: componentwise on both slots
ConeCochain wedge(const ConeCochain& c, const CompatiblePair& p);
CompatiblePair wedge_pair(const CompatiblePair& a, const CompatiblePair& b);

// fundamental-class pairing; every slot whose base has fiber axes must carry
// the compact-support flag
cplx pair_fundamental(const ConeCochain& c);

}  // namespace gbvp
