#pragma once
// Concrete symbol families for the bundled scenarios.  A GammaSymbol bundles,
// per group element, an interior matrix symbol on the cotangent charts and an
// operator valued boundary symbol field on each boundary cotangent chart,
// together with first order jets in the base directions, the inverse side
// extension, ellipticity certificates and the interior/boundary compatibility
// defect.
//
// Extension convention: both sides are genuinely inverse to each other on the
// twisted plateau |eta| >= 1 (the inverse side is the exact operator inverse
// there) and interpolate through the identity inside, so that 1 - r a and
// 1 - a r vanish identically outside the unit coball of the base covariable.

#include <map>
#include <string>
#include <vector>

#include "gbvp/boundary_symbol.hpp"
#include "gbvp/crossed.hpp"
#include "gbvp/geometry.hpp"

namespace gbvp {

// ---------------------------------------------------------------------------
// descriptors

struct BoundaryFamilyDesc {
  std::string kind;         // "const" | "winding" | "tilt" | "green" | "product"
  cplx value{1.0, 0.0};     // const: multiplier on both summands
  int k = 0;                // winding: angular winding of the eta -> +inf face
  double eps0 = 0.0;        // winding: imaginary bump on the transition zone
  bool degenerate = false;  // winding: freeze the step at 1/2 (kills ellipticity)
  double c = 0.0;           // tilt: strength, must stay > -1
  cplx q{1.0, 0.0};         // green: multiplier on the extra summand
  double strength = 0.0;    // green: size of the rank one half line kernel
  std::vector<BoundaryFamilyDesc> factors;  // product: composed left to right
};

struct InteriorFamilyDesc {
  std::string kind;  // "const" | "collar_tilt"
  Mat value;         // const: N x N coefficient
  double c = 0.0;    // collar_tilt strength, must stay > -1
};

struct SymbolTermDesc {
  int gamma = 0;
  InteriorFamilyDesc interior;
  std::vector<BoundaryFamilyDesc> boundary;  // one per boundary component
};

struct GSymbolDesc {
  int N = 1;
  std::vector<SymbolTermDesc> terms;
};

// ---------------------------------------------------------------------------
// first order jets of boundary symbols in the base directions of T*X

struct BoundaryJet {
  BoundarySymbol val;
  std::vector<BoundarySymbol> d;  // one per tracked base direction
};

// Interior matrix value with exact first derivatives.
struct InteriorJet {
  Mat val;
  std::vector<Mat> d;  // base coordinates first, then covector coordinates
};

BoundarySymbol bs_zero(int n);
BoundaryJet bj_zero(int n, int nd);
BoundaryJet bj_identity(int n, int nd);
BoundaryJet bj_constant(const BoundarySymbol& s, int nd);
BoundaryJet bj_add(const BoundaryJet& s, const BoundaryJet& t);
BoundaryJet bj_scale(const BoundaryJet& s, cplx z);
// Multiply by a scalar function with its own first order jet.
BoundaryJet bj_scalar(const BoundaryJet& s, cplx w, const std::vector<cplx>& dw);
// Operator composition with the Leibniz rule on the derivative slots.
BoundaryJet bj_compose(const BoundaryJet& s, const BoundaryJet& t);
// Operator inverse; derivative slots via d(s^-1) = -s^-1 (ds) s^-1.
BoundaryJet bj_invert(const BoundaryJet& s, const std::string& where = "bj_invert");
double bj_norm(const BoundaryJet& s);

// Submatrix of a rational function: row block i, column block j, block size n.
RationalFn rf_block(const RationalFn& f, int i, int j, int n);
// Block (i, j) of a boundary symbol of dimension m*n, as an n-dim symbol.
BoundarySymbol bs_block(const BoundarySymbol& s, int i, int j, int n);
// Assemble an m x m block matrix of n-dim symbols into one (m n)-dim symbol.
BoundarySymbol bs_assemble(const std::vector<BoundarySymbol>& blocks, int m);

// ---------------------------------------------------------------------------
// the scenario symbol package

class GammaSymbol {
 public:
  // Validates the descriptor against the geometry and action; throws
  // ConfigError on malformed input.
  GammaSymbol(const GSymbolDesc& desc, const Geometry& geom,
              const GroupAction& act, ExtensionProfile prof);

  int dim() const { return desc_.N; }
  int ngroup() const { return act_.group.n; }
  int ncomp() const { return int(geom_.boundary.size()); }
  // Number of tracked base directions on component bc: 2 for a circle
  // (theta, eta), 0 for a point.
  int nd(int bc) const { return geom_.boundary[bc].periodic ? 2 : 0; }
  const GSymbolDesc& desc() const { return desc_; }
  const Geometry& geometry() const { return geom_; }
  const GroupAction& action() const { return act_; }
  const ExtensionProfile& profile() const { return prof_; }
  double collar_width() const { return 0.5 * (geom_.r1 - geom_.r0); }

  // Interior coefficient of group element gamma at chart point x with
  // covector xi (chart coordinates).  r_side gives the inverse side
  // extension; coefficients without a term are zero.
  Mat interior(int gamma, int chart, const RVec& x, const RVec& xi,
               bool r_side) const;

  // Radial fiber of the interior coefficient at radius r and angular mode m:
  // the symbol as a rational function of the radial covariable.
  RationalFn interior_radial(int gamma, double r, int m) const;

  // Interior coefficient with exact first derivatives, slots ordered as
  // (base coordinates..., covector coordinates...) in chart order.
  InteriorJet interior_jet(int gamma, int chart, const RVec& x, const RVec& xi,
                           bool r_side) const;

  // Boundary jet of coefficient gamma over component bc at (theta, eta).
  // Point components ignore theta and eta and carry no derivative slots.
  BoundaryJet boundary(int gamma, int bc, double theta, double eta,
                       bool r_side) const;

  // Invertibility of the full crossed interior symbol on cosphere samples.
  // Throws NotInvertibleError with the failing sample in the location.
  void check_interior(double tol = 1e-8) const;
  // Invertibility of the crossed boundary symbol on the twisted plateau.
  void check_boundary() const;
  // Max deviation between the boundary restriction of the interior symbol
  // and the principal part of the boundary families, |eta| >= 1 samples.
  double compatibility_defect() const;

  // Blend profiles (exposed for the tests): the winding step and its
  // derivative, and the even tilt bump and its derivative.
  double wstep(double eta) const;
  double dwstep(double eta) const;
  double wbump(double eta) const;
  double dwbump(double eta) const;

 private:
  GSymbolDesc desc_;
  Geometry geom_;
  GroupAction act_;
  ExtensionProfile prof_;
  std::vector<int> term_of_gamma_;    // term index per group element, -1 absent
  std::vector<Mat> const_inverse_;    // crossed inverse of a const interior
  bool interior_const_ = true;

  struct PlateauKey {
    int bc;
    long long th_bits;
    long long m_bits;
    bool operator<(const PlateauKey& o) const;
  };
  // gamma-indexed inverse-side coefficients at one plateau point; circle
  // components carry the d/dtheta slot (the plateau value is eta-constant).
  struct PlateauInverse {
    std::vector<BoundaryJet> coef;
  };
  mutable std::map<PlateauKey, PlateauInverse> plateau_cache_;

  void validate() const;
  double collar(int bc, double r) const;   // collar profile of component bc
  double dcollar(int bc, double r) const;
  // a-side jet of one descriptor at (theta, eta) on component bc.
  BoundaryJet family_jet(const BoundaryFamilyDesc& d, int bc, double theta,
                         double eta) const;
  // inverse side jet of one descriptor, trivial group circle components.
  BoundaryJet family_rjet(const BoundaryFamilyDesc& d, int bc, double theta,
                          double eta) const;
  // Point of component bc mapped by group element g (component index and
  // boundary parameter of the image).
  void map_boundary_point(int g, int bc, double theta, int& bc_out,
                          double& theta_out) const;
  const PlateauInverse& plateau_inverse(int bc, double theta, double m) const;
  BoundaryJet boundary_a(int gamma, int bc, double theta, double eta) const;
  BoundaryJet boundary_r(int gamma, int bc, double theta, double eta) const;
};

}  // namespace gbvp
