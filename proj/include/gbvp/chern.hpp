// Equivariant character cochains for crossed symbol pairs and the
// cohomological side of the index pairing.
//
// The interior pair (a, r) is sampled on a cotangent grid over the chart
// and pushed through the crossed form algebra; the boundary pair runs
// through the operator valued jets instead, where the regularized trace
// replaces the matrix trace.  Both sides assemble the same expression,
//
//   tau[ exp(-Omega/2pi i)(1 - r a) + a exp(-Omega/2pi i) r - 1 ],
//   Omega = dr ^ da + (r da)^2,
//
// which vanishes identically wherever r is a two sided inverse of a, so
// the cochain is compactly supported in the fiber directions.
#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "gbvp/crossed.hpp"
#include "gbvp/forms.hpp"
#include "gbvp/geometry.hpp"
#include "gbvp/symbol_family.hpp"

namespace gbvp {

// Square matrix of graded forms over one shared base, row major.
struct FormMat {
  int n = 0;
  std::vector<GradedForm> m;

  static FormMat zero(const FormBase& b, int n);
  static FormMat identity(const FormBase& b, int n);
  GradedForm& at(int i, int j) { return m[i * n + j]; }
  const GradedForm& at(int i, int j) const { return m[i * n + j]; }
};

FormMat fm_add(const FormMat& a, const FormMat& b);
FormMat fm_sub(const FormMat& a, const FormMat& b);
FormMat fm_scale(cplx z, const FormMat& a);
FormMat fm_mul(const FormMat& a, const FormMat& b);  // wedge in each entry
FormMat fm_d(const FormMat& a);
GradedForm fm_trace(const FormMat& a);

// Pullback of grid forms along the inverse of one group element.  Only
// actions that permute the grid nodes exactly are accepted: rotations
// shift the periodic axis by whole steps and leave the other axes alone,
// reflections reverse symmetric line and fiber axes.  Covector and
// reversed axes contribute a sign per slot they occupy in a multi index.
class GridPullback {
 public:
  GridPullback() = default;  // trivial group on an empty base
  // comp_map[gamma][dst component] = source component; identity if empty.
  GridPullback(const FormBase& b, const GroupAction& act,
               std::vector<std::vector<int>> comp_map = {});
  int ngroup() const { return ng_; }
  GradedForm apply(int gamma, const GradedForm& w) const;
  FormMat apply(int gamma, const FormMat& a) const;

 private:
  FormBase base_;
  int ng_ = 1;
  std::vector<std::vector<long>> src_;      // [gamma][dst node] = src node
  std::vector<std::vector<int>> comp_src_;  // [gamma][dst comp] = src comp
  std::vector<std::vector<double>> sign_;   // [gamma][axis]
};

// Crossed element with matrix form coefficients, one per group element.
struct CrossedForm {
  std::vector<FormMat> c;
};

CrossedForm cf_zero(const FormBase& b, int n, int ng);
CrossedForm cf_unit(const FormBase& b, int n, int ng);
CrossedForm cf_add(const CrossedForm& a, const CrossedForm& b);
CrossedForm cf_sub(const CrossedForm& a, const CrossedForm& b);
CrossedForm cf_scale(cplx z, const CrossedForm& a);
CrossedForm cf_d(const CrossedForm& a);
// Twisted convolution (a * b)_g = sum_{i j = g} a_i ^ pull_i(b_j).
CrossedForm cf_mul(const CrossedForm& a, const CrossedForm& b,
                   const FiniteGroup& grp, const GridPullback& pull);

// Coefficient gamma of the character of the pair, traced to a scalar
// graded form.  The degree one slots of the pair are passed explicitly so
// callers choose between grid differences and exact jets.
GradedForm character_form(const CrossedForm& a, const CrossedForm& da,
                          const CrossedForm& r, const CrossedForm& dr,
                          int gamma, const FiniteGroup& grp,
                          const GridPullback& pull);

// Todd pair of the complexified tangent bundle over a surface or curve
// chart: the product of the generating series over the two conjugate
// eigenvalue two forms +x and -x, truncated by degree.  gauss samples the
// curvature of the base metric at a chart point (zero when absent).
CompatiblePair todd_pair(const FormBase& mb, const FormBase& xb,
                         const Fibration& fib,
                         const std::function<double(const RVec&)>& gauss = {});

// Neumann inverse of a pair whose degree zero part has no zeros on the grid.
CompatiblePair invert_pair(const CompatiblePair& p);

// det(1 - gamma) on the normal bundle of a point stratum.
double normal_factor(const FixedStratum& st);

// One conjugacy class of the index pairing.
struct StratumTerm {
  int gamma = 0;
  std::string name;
  StratumShape m_shape = StratumShape::full;
  StratumShape x_shape = StratumShape::full;
  cplx value{0.0, 0.0};  // oriented contribution to the index form
  double normal_det = 1.0;
};

class ChernEngine {
 public:
  // n_fiber nodes per fiber axis of the cone layout (the boundary grid
  // shares them, so the cone restriction stays layout exact); n_pair is a
  // finer fiber count used only when integrating the boundary character.
  // The engine holds on to sym, which must outlive it.
  ChernEngine(const GammaSymbol& sym, int n_fiber, int n_pair = 257,
              double xi_max = 2.0);

  const FormBase& m_base() const { return mb_; }
  const FormBase& x_base() const { return xb_; }
  Fibration fibration() const { return fib_; }
  // Induced wall orientation factor of boundary component bc.
  double wall_factor(int bc) const;

  // Interior pair on the cone layout with exact derivative slots.
  CrossedForm interior_form(bool r_side) const;
  CrossedForm interior_derivative(bool r_side) const;

  // Identity class character cochain on the cone layout.
  ConeCochain character() const;
  // Boundary character of coefficient class gamma on an explicit grid,
  // weighted per component by the induced wall orientation.
  GradedForm boundary_character(int gamma, const FormBase& xb) const;
  // Todd pair over the chart of this engine.
  CompatiblePair todd(const std::function<double(const RVec&)>& gauss = {}) const;

  // Per conjugacy class contributions; index_form sums them under the
  // frozen orientation convention.
  std::vector<StratumTerm> terms() const;
  cplx index_form() const;

 private:
  const GammaSymbol* sym_;
  int n_pair_;
  double xi_max_;
  FormBase mb_, xb_;
  Fibration fib_;
  GridPullback m_pull_, x_pull_;
  std::vector<FixedStratum> strata_;

  cplx point_value(const FixedStratum& st) const;
};

}  // namespace gbvp
