#include "gbvp/chern.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "gbvp/boundary_symbol.hpp"
#include "gbvp/common.hpp"

namespace gbvp {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

// -1/(2 pi i), the degree step of the character series.
const cplx kDegCoef(0.0, 1.0 / kTwoPi);

// Orientation of the fundamental class in the pairing, frozen against the
// circle winding model: the boundary family with plateau winding k has
// operator index -k, and the raw form integral of its character over
// (theta, eta) comes out +k on the inner wall.
constexpr double kOrient = -1.0;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

std::vector<long> chart_strides(const FormBase& b) {
  const int dim = b.dim();
  std::vector<long> s(dim, 1);
  for (int a = dim - 2; a >= 0; --a) s[a] = s[a + 1] * b.axes[a + 1].n;
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// matrices of graded forms

FormMat FormMat::zero(const FormBase& b, int n) {
  FormMat out;
  out.n = n;
  out.m.assign(size_t(n) * n, GradedForm::zero(b));
  return out;
}

FormMat FormMat::identity(const FormBase& b, int n) {
  FormMat out = zero(b, n);
  for (int i = 0; i < n; ++i)
    out.at(i, i).at(0, 0).setConstant(b.points(), cplx(1.0, 0.0));
  return out;
}

FormMat fm_add(const FormMat& a, const FormMat& b) {
  require(a.n == b.n, "form matrix: size mismatch");
  FormMat out;
  out.n = a.n;
  out.m.reserve(a.m.size());
  for (size_t k = 0; k < a.m.size(); ++k) out.m.push_back(a.m[k] + b.m[k]);
  return out;
}

FormMat fm_sub(const FormMat& a, const FormMat& b) {
  require(a.n == b.n, "form matrix: size mismatch");
  FormMat out;
  out.n = a.n;
  out.m.reserve(a.m.size());
  for (size_t k = 0; k < a.m.size(); ++k) out.m.push_back(a.m[k] - b.m[k]);
  return out;
}

FormMat fm_scale(cplx z, const FormMat& a) {
  FormMat out;
  out.n = a.n;
  out.m.reserve(a.m.size());
  for (const auto& w : a.m) out.m.push_back(z * w);
  return out;
}

FormMat fm_mul(const FormMat& a, const FormMat& b) {
  require(a.n == b.n, "form matrix: size mismatch");
  const int n = a.n;
  FormMat out = FormMat::zero(a.m[0].base, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      GradedForm acc = out.at(i, j);
      for (int k = 0; k < n; ++k)
        acc = acc + wedge_forms(a.at(i, k), b.at(k, j));
      out.at(i, j) = std::move(acc);
    }
  return out;
}

FormMat fm_d(const FormMat& a) {
  FormMat out;
  out.n = a.n;
  out.m.reserve(a.m.size());
  for (const auto& w : a.m) out.m.push_back(exterior_derivative(w));
  return out;
}

GradedForm fm_trace(const FormMat& a) {
  GradedForm out = GradedForm::zero(a.m[0].base);
  for (int i = 0; i < a.n; ++i) out = out + a.at(i, i);
  return out;
}

// ---------------------------------------------------------------------------
// exact grid pullbacks

GridPullback::GridPullback(const FormBase& b, const GroupAction& act,
                           std::vector<std::vector<int>> comp_map)
    : base_(b), ng_(act.group.n) {
  const int dim = b.dim();
  const long chart = b.chart_points();
  const std::vector<long> stride = chart_strides(b);

  if (comp_map.empty()) {
    comp_map.assign(ng_, std::vector<int>(b.ncomp));
    for (int g = 0; g < ng_; ++g)
      for (int c = 0; c < b.ncomp; ++c) comp_map[g][c] = c;
  }
  require(int(comp_map.size()) == ng_, "pullback: component map size");
  comp_src_ = std::move(comp_map);

  src_.assign(ng_, {});
  sign_.assign(ng_, std::vector<double>(dim, 1.0));
  for (int g = 0; g < ng_; ++g) {
    // per axis: index map i -> src(i) and the orientation of the axis map
    std::vector<std::vector<long>> ax(dim);
    for (int a = 0; a < dim; ++a) {
      const Axis& x = b.axes[a];
      ax[a].resize(x.n);
      if (g == 0 || act.kind == ActionKind::trivial) {
        for (int i = 0; i < x.n; ++i) ax[a][i] = i;
      } else if (act.kind == ActionKind::rotation) {
        if (x.kind == AxisKind::periodic) {
          const double s = act.angle[g] / x.step();
          const long sh = std::lround(s);
          if (std::abs(s - double(sh)) > 1e-9)
            throw ConfigError(
                "pullback: rotation does not shift the periodic axis by "
                "whole steps");
          for (int i = 0; i < x.n; ++i)
            ax[a][i] = ((i - sh) % x.n + x.n) % x.n;
        } else {
          for (int i = 0; i < x.n; ++i) ax[a][i] = i;
        }
      } else {  // reflection
        if (x.kind == AxisKind::periodic)
          throw ConfigError("pullback: reflection on a periodic axis");
        for (int i = 0; i < x.n; ++i) ax[a][i] = x.n - 1 - i;
        sign_[g][a] = -1.0;
      }
    }
    src_[g].resize(chart);
    std::vector<int> iv(dim, 0);
    for (long p = 0; p < chart; ++p) {
      long s = 0;
      for (int a = 0; a < dim; ++a) s += ax[a][iv[a]] * stride[a];
      src_[g][p] = s;
      for (int a = dim - 1; a >= 0; --a) {
        if (++iv[a] < b.axes[a].n) break;
        iv[a] = 0;
      }
    }
  }
}

GradedForm GridPullback::apply(int gamma, const GradedForm& w) const {
  require(gamma >= 0 && gamma < ng_, "pullback: element out of range");
  require(w.base.same_layout(base_), "pullback: base mismatch");
  GradedForm out = GradedForm::zero(w.base);
  out.compact = w.compact;
  out.support = w.support;
  const int dim = w.base.dim();
  const long chart = w.base.chart_points();
  for (int j = 0; j < int(w.deg.size()); ++j) {
    const auto idx = multi_indices(dim, j);
    for (int c = 0; c < int(idx.size()); ++c) {
      if (!w.has(j, c)) continue;
      double sgn = 1.0;
      for (int a : idx[c]) sgn *= sign_[gamma][a];
      const Vec& f = w.deg[j][c];
      Vec& dst = out.at(j, c);
      for (int comp = 0; comp < w.base.ncomp; ++comp) {
        const long doff = long(comp) * chart;
        const long soff = long(comp_src_[gamma][comp]) * chart;
        for (long p = 0; p < chart; ++p)
          dst[doff + p] = sgn * f[soff + src_[gamma][p]];
      }
    }
  }
  return out;
}

FormMat GridPullback::apply(int gamma, const FormMat& a) const {
  FormMat out;
  out.n = a.n;
  out.m.reserve(a.m.size());
  for (const auto& w : a.m) out.m.push_back(apply(gamma, w));
  return out;
}

// ---------------------------------------------------------------------------
// crossed form algebra

CrossedForm cf_zero(const FormBase& b, int n, int ng) {
  CrossedForm out;
  out.c.assign(ng, FormMat::zero(b, n));
  return out;
}

CrossedForm cf_unit(const FormBase& b, int n, int ng) {
  CrossedForm out = cf_zero(b, n, ng);
  out.c[0] = FormMat::identity(b, n);
  return out;
}

CrossedForm cf_add(const CrossedForm& a, const CrossedForm& b) {
  require(a.c.size() == b.c.size(), "crossed form: group size mismatch");
  CrossedForm out;
  out.c.reserve(a.c.size());
  for (size_t g = 0; g < a.c.size(); ++g)
    out.c.push_back(fm_add(a.c[g], b.c[g]));
  return out;
}

CrossedForm cf_sub(const CrossedForm& a, const CrossedForm& b) {
  require(a.c.size() == b.c.size(), "crossed form: group size mismatch");
  CrossedForm out;
  out.c.reserve(a.c.size());
  for (size_t g = 0; g < a.c.size(); ++g)
    out.c.push_back(fm_sub(a.c[g], b.c[g]));
  return out;
}

CrossedForm cf_scale(cplx z, const CrossedForm& a) {
  CrossedForm out;
  out.c.reserve(a.c.size());
  for (const auto& m : a.c) out.c.push_back(fm_scale(z, m));
  return out;
}

CrossedForm cf_d(const CrossedForm& a) {
  CrossedForm out;
  out.c.reserve(a.c.size());
  for (const auto& m : a.c) out.c.push_back(fm_d(m));
  return out;
}

CrossedForm cf_mul(const CrossedForm& a, const CrossedForm& b,
                   const FiniteGroup& grp, const GridPullback& pull) {
  const int ng = grp.n;
  require(int(a.c.size()) == ng && int(b.c.size()) == ng,
          "crossed form: group size mismatch");
  CrossedForm out = cf_zero(a.c[0].m[0].base, a.c[0].n, ng);
  for (int i = 0; i < ng; ++i) {
    for (int j = 0; j < ng; ++j) {
      const int g = grp.mult[i][j];
      out.c[g] = fm_add(out.c[g], fm_mul(a.c[i], pull.apply(i, b.c[j])));
    }
  }
  return out;
}

GradedForm character_form(const CrossedForm& a, const CrossedForm& da,
                          const CrossedForm& r, const CrossedForm& dr,
                          int gamma, const FiniteGroup& grp,
                          const GridPullback& pull) {
  const FormBase& b = a.c[0].m[0].base;
  const int n = a.c[0].n;
  const int ng = grp.n;
  const int dim = b.dim();
  const CrossedForm unit = cf_unit(b, n, ng);

  CrossedForm om = cf_zero(b, n, ng);
  {
    CrossedForm rda = cf_mul(r, da, grp, pull);
    om = cf_add(cf_mul(dr, da, grp, pull), cf_mul(rda, rda, grp, pull));
  }
  // E = sum_j (-1/2 pi i)^j Omega^j / j!, truncated by the base dimension
  CrossedForm ser = cf_add(unit, cf_scale(kDegCoef, om));
  if (dim >= 4) {
    CrossedForm om2 = cf_mul(om, om, grp, pull);
    ser = cf_add(ser, cf_scale(0.5 * kDegCoef * kDegCoef, om2));
  }
  CrossedForm rest = cf_sub(unit, cf_mul(r, a, grp, pull));
  CrossedForm t = cf_mul(ser, rest, grp, pull);
  t = cf_add(t, cf_mul(cf_mul(a, ser, grp, pull), r, grp, pull));
  t = cf_sub(t, unit);
  return fm_trace(t.c[gamma]);
}

// ---------------------------------------------------------------------------
// Todd pair and pair inversion

namespace {

GradedForm ones_form(const FormBase& b) {
  GradedForm w = GradedForm::zero(b);
  w.at(0, 0).setConstant(b.points(), cplx(1.0, 0.0));
  return w;
}

// (s + nu)^{-1} with s the degree zero slot; scalar coefficients commute,
// so the Neumann series s^{-1} sum (-nu s^{-1})^j terminates by degree.
GradedForm graded_inverse(const GradedForm& w) {
  const FormBase& b = w.base;
  require(w.has(0, 0), "pair inverse: no degree zero part");
  GradedForm recip = GradedForm::zero(b);
  {
    Vec& v = recip.at(0, 0);
    const Vec& s = w.get(0, 0);
    for (long p = 0; p < b.points(); ++p) {
      require(std::abs(s[p]) > 1e-12, "pair inverse: degree zero vanishes");
      v[p] = 1.0 / s[p];
    }
  }
  GradedForm nu = w;
  nu.deg[0][0] = Vec();
  GradedForm out = recip;
  GradedForm term = recip;
  for (int k = 1; k <= b.dim(); ++k) {
    term = cplx(-1.0) * wedge_forms(wedge_forms(term, nu), recip);
    if (term.top() < 0) break;
    out = out + term;
  }
  return out;
}

}  // namespace

CompatiblePair todd_pair(const FormBase& mb, const FormBase& xb,
                         const Fibration& fib,
                         const std::function<double(const RVec&)>& gauss) {
  CompatiblePair out;
  out.fib = fib;
  out.x_part = ones_form(xb);
  GradedForm unit = ones_form(mb);
  // curvature two form of the base metric lives on the first two axes
  bool curved = bool(gauss);
  if (mb.dim() < 4) curved = false;
  if (!curved) {
    out.m_part = unit;
    return out;
  }
  GradedForm x = GradedForm::zero(mb);
  {
    Vec& v = x.at(2, multi_rank(mb.dim(), {0, 1}));
    const long n0 = mb.axes[0].n;
    const long inner = mb.chart_points() / n0 / mb.axes[1].n;
    RVec pt(2);
    for (long i = 0; i < n0; ++i)
      for (long j = 0; j < mb.axes[1].n; ++j) {
        pt(0) = mb.axes[0].node(int(i));
        pt(1) = mb.axes[1].node(int(j));
        const cplx val(gauss(pt), 0.0);
        const long off = (i * mb.axes[1].n + j) * inner;
        for (long k = 0; k < inner; ++k) v[off + k] = val;
      }
  }
  // generating series x/(1 - e^{-x}) = 1 + x/2 + x^2/12 over the conjugate
  // eigenvalue forms +x and -x; the odd halves cancel exactly
  GradedForm xx = wedge_forms(x, x);
  GradedForm tp = unit + cplx(0.5) * x + cplx(1.0 / 12.0) * xx;
  GradedForm tm = unit - cplx(0.5) * x + cplx(1.0 / 12.0) * xx;
  out.m_part = wedge_forms(tp, tm);
  return out;
}

CompatiblePair invert_pair(const CompatiblePair& p) {
  CompatiblePair out;
  out.fib = p.fib;
  out.m_part = graded_inverse(p.m_part);
  out.x_part = graded_inverse(p.x_part);
  return out;
}

double normal_factor(const FixedStratum& st) {
  if (st.normal_m.rows() == 0) return 1.0;
  const Mat eye = Mat::Identity(st.normal_m.rows(), st.normal_m.cols());
  return (eye - st.normal_m).determinant().real();
}

// ---------------------------------------------------------------------------
// boundary side: operator valued graded forms on the cosphere grid

namespace {

// Slots 0: value, 1: d theta, 2: d eta, 3: d theta ^ d eta.  A slot is
// present when its vector is allocated; absent slots are structural zeros.
struct OpGrid {
  int ng = 1;
  long npts = 0;
  std::array<std::vector<std::vector<BoundarySymbol>>, 4> s;

  bool has(int slot) const { return !s[slot].empty(); }
  void alloc(int slot, int n) {
    s[slot].assign(ng, std::vector<BoundarySymbol>(npts, bs_zero(n)));
  }
};

struct OpLayout {
  const FiniteGroup* grp = nullptr;
  long chart = 0;  // points per component
  int ncomp = 1;
  // source point of the pullback by element g at destination point p
  std::vector<std::vector<long>> src;
};

// slot combinations of the graded product, with the one form sign
struct SlotTerm {
  int dst, lhs, rhs;
  double sign;
};
constexpr SlotTerm kSlotTerms[] = {
    {0, 0, 0, 1.0}, {1, 1, 0, 1.0}, {1, 0, 1, 1.0},  {2, 2, 0, 1.0},
    {2, 0, 2, 1.0}, {3, 3, 0, 1.0}, {3, 0, 3, 1.0},  {3, 1, 2, 1.0},
    {3, 2, 1, -1.0}};

OpGrid og_mul(const OpGrid& f, const OpGrid& h, const OpLayout& lay, int n) {
  OpGrid out;
  out.ng = f.ng;
  out.npts = f.npts;
  for (const SlotTerm& t : kSlotTerms) {
    if (!f.has(t.lhs) || !h.has(t.rhs)) continue;
    if (!out.has(t.dst)) out.alloc(t.dst, n);
    for (int i = 0; i < out.ng; ++i)
      for (int j = 0; j < out.ng; ++j) {
        const int g = lay.grp->mult[i][j];
        auto& dst = out.s[t.dst][g];
        const auto& lv = f.s[t.lhs][i];
        const auto& rv = h.s[t.rhs][j];
        for (long p = 0; p < out.npts; ++p) {
          BoundarySymbol prod =
              compose_boundary(lv[p], rv[lay.src[i][p]]);
          if (t.sign < 0.0) prod = bs_scale(prod, cplx(-1.0, 0.0));
          dst[p] = bs_add(dst[p], prod);
        }
      }
  }
  return out;
}

OpGrid og_pick(const OpGrid& f, std::initializer_list<int> slots) {
  OpGrid out;
  out.ng = f.ng;
  out.npts = f.npts;
  for (int s : slots)
    if (f.has(s)) out.s[s] = f.s[s];
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// the engine

ChernEngine::ChernEngine(const GammaSymbol& sym, int n_fiber, int n_pair,
                         double xi_max)
    : sym_(&sym), n_pair_(n_pair), xi_max_(xi_max) {
  if (n_fiber < 5 || n_pair < 5)
    throw ConfigError("chern engine: fiber grid too small");
  if (xi_max <= 1.0)
    throw ConfigError("chern engine: fiber range must cover the plateau");
  const Geometry& g = sym.geometry();
  const GroupAction& act = sym.action();

  mb_.tag = "cone-m";
  mb_.ncomp = 1;
  if (g.kind == GeomKind::interval) {
    mb_.axes = {Axis{"x", AxisKind::line, g.r0, g.r1, g.n_rad},
                Axis{"xi", AxisKind::fiber, -xi_max, xi_max, n_fiber}};
  } else {
    mb_.axes = {Axis{"r", AxisKind::line, g.r0, g.r1, g.n_rad},
                Axis{"theta", AxisKind::periodic, 0.0, kTwoPi, g.n_ang},
                Axis{"xir", AxisKind::fiber, -xi_max, xi_max, n_fiber},
                Axis{"xith", AxisKind::fiber, -xi_max, xi_max, n_fiber}};
  }

  xb_.tag = "cone-x";
  xb_.ncomp = int(g.boundary.size());
  if (g.kind != GeomKind::interval)
    xb_.axes = {Axis{"theta", AxisKind::periodic, 0.0, kTwoPi, g.n_ang},
                Axis{"eta", AxisKind::fiber, -xi_max, xi_max, n_fiber}};

  fib_.collar_axis = 0;
  fib_.conormal_axis = (g.kind == GeomKind::interval) ? 1 : 2;
  for (const auto& bc : g.boundary) fib_.at_hi.push_back(bc.xn_sign < 0 ? 1 : 0);

  std::vector<std::vector<int>> xcomp;
  if (act.kind == ActionKind::reflection && xb_.ncomp == 2)
    xcomp = {{0, 1}, {1, 0}};
  m_pull_ = GridPullback(mb_, act);
  x_pull_ = GridPullback(xb_, act, xcomp);
  strata_ = fixed_strata(g, act);
}

double ChernEngine::wall_factor(int bc) const {
  // induced wall orientation, matching the cone pushforward convention
  const double outward = fib_.at_hi[bc] ? 1.0 : -1.0;
  const double collar_pos = (fib_.collar_axis % 2 == 0) ? 1.0 : -1.0;
  const int q =
      fib_.conormal_axis - (fib_.conormal_axis > fib_.collar_axis ? 1 : 0);
  const double conormal_pos = (q % 2 == 0) ? 1.0 : -1.0;
  return outward * collar_pos * conormal_pos;
}

namespace {

// split an m-grid node into chart coordinates and covector coordinates
void node_coords(const FormBase& b, int dim, const std::vector<int>& iv,
                 RVec* x, RVec* xi) {
  for (int a = 0; a < dim; ++a) (*x)(a) = b.axes[a].node(iv[a]);
  for (int a = 0; a < dim; ++a) (*xi)(a) = b.axes[dim + a].node(iv[dim + a]);
}

}  // namespace

CrossedForm ChernEngine::interior_form(bool r_side) const {
  const int ng = sym_->ngroup();
  const int n = sym_->dim();
  const int dim = sym_->geometry().dim();
  CrossedForm out = cf_zero(mb_, n, ng);
  const long chart = mb_.chart_points();
  RVec x(dim), xi(dim);
  std::vector<int> iv(mb_.dim(), 0);
  for (long p = 0; p < chart; ++p) {
    node_coords(mb_, dim, iv, &x, &xi);
    for (int g = 0; g < ng; ++g) {
      const Mat v = sym_->interior(g, 0, x, xi, r_side);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          GradedForm& w = out.c[g].at(i, j);
          const cplx z = v(i, j);
          if (z == cplx(0.0, 0.0) && !w.has(0, 0)) continue;
          w.at(0, 0)[p] = z;
        }
    }
    for (int a = mb_.dim() - 1; a >= 0; --a) {
      if (++iv[a] < mb_.axes[a].n) break;
      iv[a] = 0;
    }
  }
  return out;
}

CrossedForm ChernEngine::interior_derivative(bool r_side) const {
  const int ng = sym_->ngroup();
  const int n = sym_->dim();
  const int dim = sym_->geometry().dim();
  CrossedForm out = cf_zero(mb_, n, ng);
  const long chart = mb_.chart_points();
  RVec x(dim), xi(dim);
  std::vector<int> iv(mb_.dim(), 0);
  for (long p = 0; p < chart; ++p) {
    node_coords(mb_, dim, iv, &x, &xi);
    for (int g = 0; g < ng; ++g) {
      const InteriorJet jet = sym_->interior_jet(g, 0, x, xi, r_side);
      for (int k = 0; k < int(jet.d.size()); ++k) {
        const Mat& v = jet.d[k];
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            GradedForm& w = out.c[g].at(i, j);
            const cplx z = v(i, j);
            if (z == cplx(0.0, 0.0) && !w.has(1, k)) continue;
            w.at(1, k)[p] = z;
          }
      }
    }
    for (int a = mb_.dim() - 1; a >= 0; --a) {
      if (++iv[a] < mb_.axes[a].n) break;
      iv[a] = 0;
    }
  }
  return out;
}

GradedForm ChernEngine::boundary_character(int gamma, const FormBase& xb) const {
  const Geometry& g = sym_->geometry();
  const GroupAction& act = sym_->action();
  const int ng = sym_->ngroup();
  const int n = sym_->dim();
  require(xb.ncomp == int(g.boundary.size()),
          "boundary character: component count mismatch");
  const bool circle = xb.dim() == 2;

  OpLayout lay;
  lay.grp = &act.group;
  lay.ncomp = xb.ncomp;
  lay.chart = xb.chart_points();
  const long npts = xb.points();

  // pullback point maps per group element
  lay.src.assign(ng, std::vector<long>(npts));
  const int nth = circle ? xb.axes[0].n : 1;
  const long inner = circle ? xb.axes[1].n : 1;
  for (int e = 0; e < ng; ++e) {
    long shift = 0;
    int cswap = 0;
    if (e != 0 && act.kind == ActionKind::rotation) {
      const double s = act.angle[e] / (kTwoPi / nth);
      shift = std::lround(s);
      if (std::abs(s - double(shift)) > 1e-9)
        throw ConfigError("boundary character: incommensurate rotation");
    }
    if (e != 0 && act.kind == ActionKind::reflection) cswap = 1;
    for (long p = 0; p < npts; ++p) {
      const long comp = p / lay.chart;
      const long rest = p % lay.chart;
      const long t = circle ? rest / inner : 0;
      const long k = circle ? rest % inner : 0;
      const long scomp = cswap ? (lay.ncomp - 1 - comp) : comp;
      const long st = ((t - shift) % nth + nth) % nth;
      lay.src[e][p] = scomp * lay.chart + st * inner + k;
    }
  }

  // sampled jets of both sides
  OpGrid A, R;
  A.ng = R.ng = ng;
  A.npts = R.npts = npts;
  A.alloc(0, n);
  R.alloc(0, n);
  if (circle) {
    for (int s = 1; s <= 2; ++s) {
      A.alloc(s, n);
      R.alloc(s, n);
    }
  }
  for (int e = 0; e < ng; ++e)
    for (long p = 0; p < npts; ++p) {
      const int comp = int(p / lay.chart);
      const long rest = p % lay.chart;
      const double th = circle ? xb.axes[0].node(int(rest / inner)) : 0.0;
      const double eta = circle ? xb.axes[1].node(int(rest % inner)) : 0.0;
      BoundaryJet ja = sym_->boundary(e, comp, th, eta, false);
      BoundaryJet jr = sym_->boundary(e, comp, th, eta, true);
      A.s[0][e][p] = std::move(ja.val);
      R.s[0][e][p] = std::move(jr.val);
      if (circle) {
        A.s[1][e][p] = std::move(ja.d[0]);
        A.s[2][e][p] = std::move(ja.d[1]);
        R.s[1][e][p] = std::move(jr.d[0]);
        R.s[2][e][p] = std::move(jr.d[1]);
      }
    }

  const OpGrid A0 = og_pick(A, {0});
  const OpGrid R0 = og_pick(R, {0});
  const OpGrid AR = og_mul(A0, R0, lay, n);
  const OpGrid RA = og_mul(R0, A0, lay, n);

  OpGrid T;
  if (circle) {
    const OpGrid dA = og_pick(A, {1, 2});
    const OpGrid dR = og_pick(R, {1, 2});
    const OpGrid RdA = og_mul(R0, dA, lay, n);
    OpGrid om = og_mul(dR, dA, lay, n);
    {
      const OpGrid sq = og_mul(RdA, RdA, lay, n);
      for (int e = 0; e < ng; ++e)
        for (long p = 0; p < npts; ++p)
          om.s[3][e][p] = bs_add(om.s[3][e][p], sq.s[3][e][p]);
    }
    // K = 1 - r a
    OpGrid K;
    K.ng = ng;
    K.npts = npts;
    K.alloc(0, n);
    const BoundarySymbol one = BoundarySymbol::identity(n);
    for (int e = 0; e < ng; ++e)
      for (long p = 0; p < npts; ++p) {
        K.s[0][e][p] = bs_scale(RA.s[0][e][p], cplx(-1.0, 0.0));
        if (e == 0) K.s[0][e][p] = bs_add(K.s[0][e][p], one);
      }
    T = og_mul(om, K, lay, n);
    const OpGrid omr = og_mul(om, R0, lay, n);
    const OpGrid aomr = og_mul(A0, omr, lay, n);
    for (int e = 0; e < ng; ++e)
      for (long p = 0; p < npts; ++p)
        T.s[3][e][p] = bs_add(T.s[3][e][p], aomr.s[3][e][p]);
  }

  GradedForm out = GradedForm::zero(xb);
  out.compact = true;
  out.support = 1.0;
  Vec& v0 = out.at(0, 0);
  Vec* v2 = circle ? &out.at(2, 0) : nullptr;
  for (long p = 0; p < npts; ++p) {
    const int comp = int(p / lay.chart);
    const double wall = wall_factor(comp);
    const cplx d0 = reg_trace_scalar(AR.s[0][gamma][p]) -
                    reg_trace_scalar(RA.s[0][gamma][p]);
    v0[p] = wall * d0;
    if (circle)
      (*v2)[p] = wall * kDegCoef * reg_trace_scalar(T.s[3][gamma][p]);
  }
  return out;
}

ConeCochain ChernEngine::character() const {
  ConeCochain c;
  c.fib = fib_;
  c.nu = 1;
  const CrossedForm a = interior_form(false);
  const CrossedForm da = interior_derivative(false);
  const CrossedForm r = interior_form(true);
  const CrossedForm dr = interior_derivative(true);
  c.m_part = character_form(a, da, r, dr, 0, sym_->action().group, m_pull_);
  c.m_part.compact = true;
  c.m_part.support = 1.0;
  c.x_part = boundary_character(0, xb_);
  return c;
}

CompatiblePair ChernEngine::todd(
    const std::function<double(const RVec&)>& gauss) const {
  return todd_pair(mb_, xb_, fib_, gauss);
}

cplx ChernEngine::point_value(const FixedStratum& st) const {
  const FiniteGroup& grp = sym_->action().group;
  const int ng = grp.n;
  const int n = sym_->dim();
  const int dim = sym_->geometry().dim();
  const RVec xi = RVec::Zero(dim);
  std::vector<Mat> a(ng), r(ng);
  for (int e = 0; e < ng; ++e) {
    a[e] = sym_->interior(e, st.point_chart, st.point, xi, false);
    r[e] = sym_->interior(e, st.point_chart, st.point, xi, true);
  }
  // class average of the coefficients of a r - r a; the point is fixed, so
  // the crossed twist leaves all evaluation points alone
  Mat acc = Mat::Zero(n, n);
  for (int i = 0; i < ng; ++i)
    for (int j = 0; j < ng; ++j) {
      const int gij = grp.mult[i][j];
      if (std::find(st.conj_class.begin(), st.conj_class.end(), gij) ==
          st.conj_class.end())
        continue;
      acc += a[i] * r[j] - r[i] * a[j];
    }
  return acc.trace() / double(st.conj_class.size());
}

std::vector<StratumTerm> ChernEngine::terms() const {
  std::vector<StratumTerm> out;
  for (const FixedStratum& st : strata_) {
    StratumTerm t;
    t.gamma = st.gamma;
    t.name = sym_->action().group.names[st.gamma];
    t.m_shape = st.m_shape;
    t.x_shape = st.x_shape;
    if (st.gamma == 0) {
      ConeCochain c;
      c.fib = fib_;
      c.nu = 1;
      {
        const CrossedForm a = interior_form(false);
        const CrossedForm da = interior_derivative(false);
        const CrossedForm r = interior_form(true);
        const CrossedForm dr = interior_derivative(true);
        c.m_part =
            character_form(a, da, r, dr, 0, sym_->action().group, m_pull_);
      }
      c.m_part.compact = true;
      c.m_part.support = 1.0;
      // the pairing alone runs on a finer fiber grid; the integrand is
      // resampled there, never interpolated
      FormBase fine = xb_;
      if (fine.dim() == 2) fine.axes[1].n = n_pair_;
      c.x_part = boundary_character(0, fine);
      t.value = kOrient * pair_fundamental(wedge(c, todd_pair(mb_, fine, fib_)));
    } else if (st.m_shape == StratumShape::point) {
      t.normal_det = normal_factor(st);
      t.value = kOrient * point_value(st) / t.normal_det;
    }
    out.push_back(std::move(t));
  }
  return out;
}

cplx ChernEngine::index_form() const {
  cplx s(0.0, 0.0);
  for (const StratumTerm& t : terms()) s += t.value;
  return s;
}

}  // namespace gbvp
