#include "gbvp/symbol_family.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <sstream>

namespace gbvp {

namespace {

Mat ident(int n) { return Mat::Identity(n, n); }

long long key_bits(double x) {
  long long b = 0;
  std::memcpy(&b, &x, sizeof(b));
  return b;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// jet algebra

BoundarySymbol bs_zero(int n) { return BoundarySymbol(n); }

BoundaryJet bj_zero(int n, int nd) {
  BoundaryJet j;
  j.val = bs_zero(n);
  j.d.assign(nd, bs_zero(n));
  return j;
}

BoundaryJet bj_identity(int n, int nd) {
  BoundaryJet j;
  j.val = BoundarySymbol::identity(n);
  j.d.assign(nd, bs_zero(n));
  return j;
}

BoundaryJet bj_constant(const BoundarySymbol& s, int nd) {
  BoundaryJet j;
  j.val = s;
  j.d.assign(nd, bs_zero(s.dim));
  return j;
}

BoundaryJet bj_add(const BoundaryJet& s, const BoundaryJet& t) {
  if (s.d.size() != t.d.size())
    throw std::invalid_argument("bj_add: jet direction count mismatch");
  BoundaryJet j;
  j.val = bs_add(s.val, t.val);
  j.d.reserve(s.d.size());
  for (size_t k = 0; k < s.d.size(); ++k) j.d.push_back(bs_add(s.d[k], t.d[k]));
  return j;
}

BoundaryJet bj_scale(const BoundaryJet& s, cplx z) {
  BoundaryJet j;
  j.val = bs_scale(s.val, z);
  j.d.reserve(s.d.size());
  for (const auto& ds : s.d) j.d.push_back(bs_scale(ds, z));
  return j;
}

BoundaryJet bj_scalar(const BoundaryJet& s, cplx w, const std::vector<cplx>& dw) {
  if (dw.size() != s.d.size())
    throw std::invalid_argument("bj_scalar: jet direction count mismatch");
  BoundaryJet j;
  j.val = bs_scale(s.val, w);
  j.d.reserve(s.d.size());
  for (size_t k = 0; k < s.d.size(); ++k)
    j.d.push_back(bs_add(bs_scale(s.d[k], w), bs_scale(s.val, dw[k])));
  return j;
}

BoundaryJet bj_compose(const BoundaryJet& s, const BoundaryJet& t) {
  if (s.d.size() != t.d.size())
    throw std::invalid_argument("bj_compose: jet direction count mismatch");
  BoundaryJet j;
  j.val = compose_boundary(s.val, t.val);
  j.d.reserve(s.d.size());
  for (size_t k = 0; k < s.d.size(); ++k)
    j.d.push_back(bs_add(compose_boundary(s.d[k], t.val),
                         compose_boundary(s.val, t.d[k])));
  return j;
}

BoundaryJet bj_invert(const BoundaryJet& s, const std::string& where) {
  BoundaryJet j;
  j.val = invert_boundary(s.val, where);
  j.d.reserve(s.d.size());
  for (const auto& ds : s.d)
    j.d.push_back(
        bs_scale(compose_boundary(compose_boundary(j.val, ds), j.val), -1.0));
  return j;
}

double bj_norm(const BoundaryJet& s) {
  double m = boundary_distance(s.val, bs_zero(s.val.dim));
  for (const auto& ds : s.d)
    m = std::max(m, boundary_distance(ds, bs_zero(ds.dim)));
  return m;
}

// ---------------------------------------------------------------------------
// block surgery on rational functions and boundary symbols

namespace {

RationalFn rf_sub(const RationalFn& f, int r0, int nr, int c0, int nc) {
  RationalFn out(nr, nc);
  out.constant = f.constant.block(r0, c0, nr, nc);
  for (const auto& t : f.terms) {
    PoleTerm p;
    p.pole = t.pole;
    for (const auto& m : t.coef) p.coef.push_back(m.block(r0, c0, nr, nc));
    out.terms.push_back(std::move(p));
  }
  return canonical(out);
}

// Place f into row block i, column block j of an m x m block zero.
RationalFn rf_embed(const RationalFn& f, int i, int j, int m) {
  RationalFn out(m * f.rows, m * f.cols);
  out.constant = Mat::Zero(m * f.rows, m * f.cols);
  out.constant.block(i * f.rows, j * f.cols, f.rows, f.cols) = f.constant;
  for (const auto& t : f.terms) {
    PoleTerm p;
    p.pole = t.pole;
    for (const auto& cm : t.coef) {
      Mat big = Mat::Zero(m * f.rows, m * f.cols);
      big.block(i * f.rows, j * f.cols, f.rows, f.cols) = cm;
      p.coef.push_back(std::move(big));
    }
    out.terms.push_back(std::move(p));
  }
  return out;
}

// Widen a kernel leg: u gains block rows, v gains block columns.
RationalFn rf_embed_rows(const RationalFn& f, int i, int m) {
  RationalFn out(m * f.rows, f.cols);
  out.constant = Mat::Zero(m * f.rows, f.cols);
  out.constant.block(i * f.rows, 0, f.rows, f.cols) = f.constant;
  for (const auto& t : f.terms) {
    PoleTerm p;
    p.pole = t.pole;
    for (const auto& cm : t.coef) {
      Mat big = Mat::Zero(m * f.rows, f.cols);
      big.block(i * f.rows, 0, f.rows, f.cols) = cm;
      p.coef.push_back(std::move(big));
    }
    out.terms.push_back(std::move(p));
  }
  return out;
}

RationalFn rf_embed_cols(const RationalFn& f, int j, int m) {
  RationalFn out(f.rows, m * f.cols);
  out.constant = Mat::Zero(f.rows, m * f.cols);
  out.constant.block(0, j * f.cols, f.rows, f.cols) = f.constant;
  for (const auto& t : f.terms) {
    PoleTerm p;
    p.pole = t.pole;
    for (const auto& cm : t.coef) {
      Mat big = Mat::Zero(f.rows, m * f.cols);
      big.block(0, j * f.cols, f.rows, f.cols) = cm;
      p.coef.push_back(std::move(big));
    }
    out.terms.push_back(std::move(p));
  }
  return out;
}

}  // namespace

RationalFn rf_block(const RationalFn& f, int i, int j, int n) {
  return rf_sub(f, i * n, n, j * n, n);
}

BoundarySymbol bs_block(const BoundarySymbol& s, int i, int j, int n) {
  BoundarySymbol out(n);
  out.a = rf_block(s.a, i, j, n);
  out.c = rf_block(s.c, i, j, n);
  out.b = rf_block(s.b, i, j, n);
  out.q = s.q.block(i * n, j * n, n, n);
  for (const auto& g : s.green) {
    GreenTerm t{rf_sub(g.u, i * n, n, 0, g.u.cols),
                rf_sub(g.v, 0, g.v.rows, j * n, n)};
    if (!t.u.is_zero() && !t.v.is_zero()) out.green.push_back(std::move(t));
  }
  return out;
}

BoundarySymbol bs_assemble(const std::vector<BoundarySymbol>& blocks, int m) {
  if (int(blocks.size()) != m * m)
    throw std::invalid_argument("bs_assemble: need m*m blocks");
  const int n = blocks[0].dim;
  BoundarySymbol out(m * n);
  RationalFn a(m * n, m * n), c(m * n, m * n), b(m * n, m * n);
  Mat q = Mat::Zero(m * n, m * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const BoundarySymbol& s = blocks[i * m + j];
      if (s.dim != n) throw std::invalid_argument("bs_assemble: block dim");
      a = add(a, rf_embed(s.a, i, j, m));
      c = add(c, rf_embed(s.c, i, j, m));
      b = add(b, rf_embed(s.b, i, j, m));
      q.block(i * n, j * n, n, n) = s.q;
      for (const auto& g : s.green)
        out.green.push_back(
            {rf_embed_rows(g.u, i, m), rf_embed_cols(g.v, j, m)});
    }
  out.a = canonical(a);
  out.c = canonical(c);
  out.b = canonical(b);
  out.q = q;
  return out;
}

// ---------------------------------------------------------------------------
// GammaSymbol

bool GammaSymbol::PlateauKey::operator<(const PlateauKey& o) const {
  if (bc != o.bc) return bc < o.bc;
  if (th_bits != o.th_bits) return th_bits < o.th_bits;
  return m_bits < o.m_bits;
}

GammaSymbol::GammaSymbol(const GSymbolDesc& desc, const Geometry& geom,
                         const GroupAction& act, ExtensionProfile prof)
    : desc_(desc), geom_(geom), act_(act), prof_(prof) {
  term_of_gamma_.assign(act_.group.n, -1);
  for (size_t t = 0; t < desc_.terms.size(); ++t) {
    int g = desc_.terms[t].gamma;
    if (g < 0 || g >= act_.group.n)
      throw ConfigError("symbol term gamma out of range");
    if (term_of_gamma_[g] >= 0)
      throw ConfigError("duplicate symbol term for one group element");
    term_of_gamma_[g] = int(t);
  }
  validate();
  if (interior_const_) {
    // Crossed inverse of the constant interior coefficients through the
    // left regular representation; the action is trivial on constants.
    const int n = desc_.N, G = act_.group.n;
    Mat reg = Mat::Zero(n * G, n * G);
    for (int a = 0; a < G; ++a)
      for (int b = 0; b < G; ++b) {
        int g = act_.group.mult[a][act_.group.inverse[b]];
        int t = term_of_gamma_[g];
        if (t >= 0) reg.block(a * n, b * n, n, n) = desc_.terms[t].interior.value;
      }
    Eigen::FullPivLU<Mat> lu(reg);
    if (lu.isInvertible()) {
      Mat inv = lu.inverse();
      const_inverse_.reserve(G);
      for (int a = 0; a < G; ++a)
        const_inverse_.push_back(inv.block(a * n, 0, n, n));
    }
  }
}

void GammaSymbol::validate() const {
  const int n = desc_.N;
  if (n < 1) throw ConfigError("symbol dimension must be positive");
  if (desc_.terms.empty()) throw ConfigError("symbol has no terms");
  bool all_const = true;
  for (const auto& t : desc_.terms)
    if (t.interior.kind != "const") all_const = false;
  const_cast<GammaSymbol*>(this)->interior_const_ = all_const;

  if (act_.kind == ActionKind::rotation && geom_.n_ang % act_.group.n != 0)
    throw ConfigError("angular grid is not commensurate with the rotation order");

  std::function<void(const BoundaryFamilyDesc&, bool, bool)> check_bd =
      [&](const BoundaryFamilyDesc& d, bool periodic, bool inside_product) {
        if (d.kind == "const") return;
        if (d.kind == "winding") {
          if (!periodic) throw ConfigError("winding family needs a circle component");
          return;
        }
        if (d.kind == "tilt") {
          if (!periodic) throw ConfigError("tilt family needs a circle component");
          if (d.c <= -0.999) throw ConfigError("tilt strength must stay above -1");
          if (act_.group.n != 1)
            throw ConfigError("tilt families are only supported with the trivial group");
          return;
        }
        if (d.kind == "green") {
          if (periodic) throw ConfigError("green family needs a point component");
          if (inside_product) throw ConfigError("green family cannot be a factor");
          if (n != 1) throw ConfigError("green family is scalar only");
          if (d.strength < 0.0) throw ConfigError("green strength must be nonnegative");
          if (std::abs(d.value) < 1e-12)
            throw ConfigError("green family needs a nonzero multiplier");
          return;
        }
        if (d.kind == "product") {
          if (!periodic) throw ConfigError("product family needs a circle component");
          if (d.factors.empty()) throw ConfigError("product family has no factors");
          if (act_.group.n != 1)
            throw ConfigError("product families are only supported with the trivial group");
          for (const auto& f : d.factors) check_bd(f, periodic, true);
          return;
        }
        throw ConfigError("unknown boundary family kind " + d.kind);
      };

  for (const auto& t : desc_.terms) {
    if (t.boundary.size() != geom_.boundary.size())
      throw ConfigError("boundary family count must match the boundary components");
    for (size_t b = 0; b < t.boundary.size(); ++b)
      check_bd(t.boundary[b], geom_.boundary[b].periodic, false);
    if (t.interior.kind == "const") {
      if (t.interior.value.rows() != n || t.interior.value.cols() != n)
        throw ConfigError("interior constant has the wrong shape");
    } else if (t.interior.kind == "collar_tilt") {
      if (geom_.kind == GeomKind::interval)
        throw ConfigError("collar tilt needs a tangential direction");
      if (t.interior.c <= -0.999)
        throw ConfigError("collar tilt strength must stay above -1");
      if (desc_.terms.size() != 1 || t.gamma != 0)
        throw ConfigError("collar tilt must be the only term and sit at the identity");
    } else {
      throw ConfigError("unknown interior family kind " + t.interior.kind);
    }
  }
}

double GammaSymbol::wstep(double eta) const {
  return prof_.chi.chi(0.5 * (eta + 1.0));
}
double GammaSymbol::dwstep(double eta) const {
  return 0.5 * prof_.chi.dchi(0.5 * (eta + 1.0));
}
double GammaSymbol::wbump(double eta) const {
  return prof_.chi.chi(std::abs(eta));
}
double GammaSymbol::dwbump(double eta) const {
  double s = eta >= 0.0 ? 1.0 : -1.0;
  return s * prof_.chi.dchi(std::abs(eta));
}

double GammaSymbol::collar(int bc, double r) const {
  const BoundaryChart& w = geom_.boundary[bc];
  double xn = w.xn_sign * (r - w.boundary_value);
  return 1.0 - prof_.chi.chi(xn / collar_width());
}
double GammaSymbol::dcollar(int bc, double r) const {
  const BoundaryChart& w = geom_.boundary[bc];
  double xn = w.xn_sign * (r - w.boundary_value);
  return -prof_.chi.dchi(xn / collar_width()) * w.xn_sign / collar_width();
}

Mat GammaSymbol::interior(int gamma, int chart, const RVec& x, const RVec& xi,
                          bool r_side) const {
  const int n = desc_.N;
  if (interior_const_) {
    if (r_side) {
      if (const_inverse_.empty())
        throw NotInvertibleError("interior symbol not invertible",
                                 "constant coefficients");
      return const_inverse_[gamma];
    }
    int t = term_of_gamma_[gamma];
    return t < 0 ? Mat(Mat::Zero(n, n)) : desc_.terms[t].interior.value;
  }
  // single collar tilt term at the identity
  if (gamma != 0) return Mat::Zero(n, n);
  const InteriorFamilyDesc& d = desc_.terms[0].interior;
  if (chart != 0) return ident(n);  // the cap chart stays clear of the collars
  const double r = x(0);
  const double eta = xi(1);
  const double W = wbump(eta);
  cplx val(1.0, 0.0);
  if (W > 0.0) {
    for (int b = 0; b < ncomp(); ++b) {
      double rho = collar(b, r);
      if (rho <= 0.0) continue;
      double xin = geom_.boundary[b].xn_sign * xi(0);
      double g = d.c * rho * eta * W;
      if (r_side) {
        val -= kI * g / (cplx(xin, 0.0) + kI * (eta + g));
      } else {
        val += kI * g / (cplx(xin, 0.0) + kI * eta);
      }
    }
  }
  return val * ident(n);
}

InteriorJet GammaSymbol::interior_jet(int gamma, int chart, const RVec& x,
                                      const RVec& xi, bool r_side) const {
  const int n = desc_.N;
  const int nd = 2 * geom_.dim();
  InteriorJet out;
  out.d.assign(nd, Mat::Zero(n, n));
  if (interior_const_ || gamma != 0 || chart != 0) {
    out.val = interior(gamma, chart, x, xi, r_side);
    return out;
  }
  // collar tilt on the polar chart; slots (r, theta, xi_r, xi_theta)
  const InteriorFamilyDesc& d = desc_.terms[0].interior;
  const double r0 = x(0);
  const double eta = xi(1);
  const double W = wbump(eta);
  const double Wp = dwbump(eta);
  cplx val(1.0, 0.0);
  cplx dr(0.0), dxr(0.0), deta(0.0);
  if (W > 0.0) {
    for (int b = 0; b < ncomp(); ++b) {
      const double rho = collar(b, r0);
      const double rhop = dcollar(b, r0);
      if (rho <= 0.0 && rhop == 0.0) continue;
      const double s = geom_.boundary[b].xn_sign;
      const double xin = s * xi(0);
      const double g = d.c * rho * eta * W;
      const double gr = d.c * rhop * eta * W;
      const double ge = d.c * rho * (W + eta * Wp);
      const cplx u(xin, eta);
      if (r_side) {
        const cplx v(xin, eta + g);
        const cplx v2 = v * v;
        val -= kI * g / v;
        dr -= kI * gr * u / v2;
        dxr += kI * g * s / v2;
        deta += -kI * ge * u / v2 - g / v2;
      } else {
        const cplx u2 = u * u;
        val += kI * g / u;
        dr += kI * gr / u;
        dxr -= kI * g * s / u2;
        deta += kI * ge / u + g / u2;
      }
    }
  }
  out.val = val * ident(n);
  out.d[0] = dr * ident(n);
  out.d[2] = dxr * ident(n);
  out.d[3] = deta * ident(n);
  return out;
}

RationalFn GammaSymbol::interior_radial(int gamma, double r, int m) const {
  const int n = desc_.N;
  if (interior_const_) {
    int t = term_of_gamma_[gamma];
    return t < 0 ? RationalFn::zero_fn(n, n)
                 : RationalFn::const_fn(desc_.terms[t].interior.value);
  }
  if (gamma != 0) return RationalFn::zero_fn(n, n);
  const InteriorFamilyDesc& d = desc_.terms[0].interior;
  RationalFn out = RationalFn::const_fn(ident(n));
  const double W = wbump(double(m));
  if (m == 0 || W <= 0.0) return out;
  for (int b = 0; b < ncomp(); ++b) {
    double rho = collar(b, r);
    if (rho <= 0.0) continue;
    double s = geom_.boundary[b].xn_sign;
    // i c rho m W / (s xi_r + i m) = s i c rho m W / (xi_r + i s m)
    cplx coef = s * kI * d.c * rho * double(m) * W;
    out.terms.push_back({-kI * s * double(m), {coef * ident(n)}});
  }
  return canonical(out);
}

BoundaryJet GammaSymbol::family_jet(const BoundaryFamilyDesc& d, int bc,
                                    double theta, double eta) const {
  const int n = desc_.N;
  const int ndd = nd(bc);
  if (d.kind == "const") {
    BoundarySymbol s(n);
    s.a = RationalFn::const_fn(d.value * ident(n));
    s.q = d.value * ident(n);
    return bj_constant(s, ndd);
  }
  if (d.kind == "winding") {
    const double w = d.degenerate ? 0.5 : wstep(eta);
    const double dw = d.degenerate ? 0.0 : dwstep(eta);
    const cplx e = std::exp(kI * double(d.k) * theta);
    const cplx q = e * w + (1.0 - w) + kI * d.eps0 * w * (1.0 - w);
    const cplx dq_th = kI * double(d.k) * e * w;
    const cplx dq_eta = dw * (e - 1.0 + kI * d.eps0 * (1.0 - 2.0 * w));
    BoundaryJet j = bj_zero(n, ndd);
    j.val.a = RationalFn::const_fn(ident(n));
    j.val.q = q * ident(n);
    j.d[0].q = dq_th * ident(n);
    j.d[1].q = dq_eta * ident(n);
    return j;
  }
  if (d.kind == "tilt") {
    const double W = wbump(eta);
    const double dW = dwbump(eta);
    const double g = d.c * eta * W;
    const double gp = d.c * (W + eta * dW);
    BoundaryJet j = bj_zero(n, ndd);
    j.val.a = RationalFn::const_fn(ident(n));
    j.val.q = ident(n);
    if (W > 0.0) {
      j.val.a.terms.push_back({-kI * eta, {kI * g * ident(n)}});
      j.val.a = canonical(j.val.a);
      RationalFn da(n, n);
      da.terms.push_back({-kI * eta, {kI * gp * ident(n), g * ident(n)}});
      j.d[1].a = canonical(da);
    }
    return j;
  }
  if (d.kind == "green") {
    BoundarySymbol s(1);
    s.a = RationalFn::const_fn(d.value * Mat::Ones(1, 1));
    s.q = d.q * Mat::Ones(1, 1);
    if (d.strength > 0.0)
      s.green.push_back({scale(laguerre_hat(0), d.strength), laguerre_bar(0)});
    return bj_constant(s, ndd);
  }
  if (d.kind == "product") {
    BoundaryJet j = family_jet(d.factors[0], bc, theta, eta);
    for (size_t f = 1; f < d.factors.size(); ++f)
      j = bj_compose(j, family_jet(d.factors[f], bc, theta, eta));
    return j;
  }
  throw ConfigError("unknown boundary family kind " + d.kind);
}

BoundaryJet GammaSymbol::family_rjet(const BoundaryFamilyDesc& d, int bc,
                                     double theta, double eta) const {
  const int n = desc_.N;
  const int ndd = nd(bc);
  if (d.kind == "winding" && !d.degenerate) {
    // Face blend: the +face inverse is the exact operator inverse of the
    // plateau family (a = I, q = e^{ik theta}); the -face inverse is the
    // identity, so the inner identity merges with the -face seamlessly.
    BoundaryJet inv = bj_identity(n, ndd);
    const cplx e = std::exp(-kI * double(d.k) * theta);
    inv.val.q = e * ident(n);
    inv.d[0].q = -kI * double(d.k) * e * ident(n);
    BoundaryJet diff = bj_add(inv, bj_scale(bj_identity(n, ndd), -1.0));
    double W = prof_.chi.chi(eta), dW = prof_.chi.dchi(eta);
    return bj_add(bj_identity(n, ndd), bj_scalar(diff, W, {0.0, dW}));
  }
  if (d.kind == "product") {
    // (f0 f1 ... fk)^{-1} = fk^{-1} ... f0^{-1}
    BoundaryJet j = family_rjet(d.factors.back(), bc, theta, eta);
    for (int f = int(d.factors.size()) - 2; f >= 0; --f)
      j = bj_compose(j, family_rjet(d.factors[f], bc, theta, eta));
    return j;
  }
  // const, green, tilt, degenerate winding: pointwise operator inverse.
  // Smooth for tilt: the family is the identity near eta = 0.
  std::ostringstream os;
  os << "inverse side of " << d.kind << " family, component " << bc
     << " theta " << fmt(theta) << " eta " << fmt(eta);
  return bj_invert(family_jet(d, bc, theta, eta), os.str());
}

void GammaSymbol::map_boundary_point(int g, int bc, double theta, int& bc_out,
                                     double& theta_out) const {
  bc_out = bc;
  theta_out = theta;
  if (act_.kind == ActionKind::rotation) {
    theta_out = theta + act_.angle[g];
  } else if (act_.kind == ActionKind::reflection && g != 0) {
    bc_out = int(geom_.boundary.size()) - 1 - bc;
  }
}

BoundaryJet GammaSymbol::boundary_a(int gamma, int bc, double theta,
                                    double eta) const {
  int t = term_of_gamma_[gamma];
  if (t < 0) return bj_zero(desc_.N, nd(bc));
  return family_jet(desc_.terms[t].boundary[bc], bc, theta, eta);
}

const GammaSymbol::PlateauInverse& GammaSymbol::plateau_inverse(
    int bc, double theta, double face) const {
  PlateauKey key{bc, key_bits(theta), key_bits(face)};
  auto it = plateau_cache_.find(key);
  if (it != plateau_cache_.end()) return it->second;

  const int n = desc_.N, G = act_.group.n;
  PlateauInverse pi;
  pi.coef.reserve(G);
  for (int gamma = 0; gamma < G; ++gamma) {
    // The coefficient at theta reads block (gamma, identity column) of the
    // regular representation inverted over the orbit of gamma^{-1}.theta.
    int bc_y = bc;
    double th_y = theta;
    map_boundary_point(act_.group.inverse[gamma], bc, theta, bc_y, th_y);
    std::vector<BoundarySymbol> val(size_t(G) * G, bs_zero(n));
    std::vector<BoundarySymbol> dth(size_t(G) * G, bs_zero(n));
    const bool circle = nd(bc) > 0;
    for (int a = 0; a < G; ++a) {
      int bc_a = bc_y;
      double th_a = th_y;
      map_boundary_point(a, bc_y, th_y, bc_a, th_a);
      for (int b = 0; b < G; ++b) {
        int g = act_.group.mult[a][act_.group.inverse[b]];
        BoundaryJet f = boundary_a(g, bc_a, th_a, face);
        val[size_t(a) * G + b] = f.val;
        if (circle) dth[size_t(a) * G + b] = f.d[0];
      }
    }
    BoundarySymbol reg = bs_assemble(val, G);
    std::ostringstream os;
    os << "boundary inverse at component " << bc << " theta " << fmt(th_y)
       << " eta " << fmt(face);
    BoundarySymbol inv = invert_boundary(reg, os.str());
    BoundaryJet out;
    out.val = bs_block(inv, gamma, 0, n);
    if (circle) {
      BoundarySymbol regt = bs_assemble(dth, G);
      BoundarySymbol dinv =
          bs_scale(compose_boundary(compose_boundary(inv, regt), inv), -1.0);
      out.d.push_back(bs_block(dinv, gamma, 0, n));
    }
    pi.coef.push_back(std::move(out));
  }
  return plateau_cache_.emplace(key, std::move(pi)).first->second;
}

BoundaryJet GammaSymbol::boundary_r(int gamma, int bc, double theta,
                                    double eta) const {
  const int n = desc_.N;
  const BoundaryChart& w = geom_.boundary[bc];
  if (!w.periodic) {
    // exact crossed operator inverse at the point component
    const PlateauInverse& pi = plateau_inverse(bc, 0.0, 0.0);
    return pi.coef[gamma];
  }
  if (act_.group.n == 1) {
    const BoundaryFamilyDesc& d = desc_.terms[term_of_gamma_[0]].boundary[bc];
    return family_rjet(d, bc, theta, eta);
  }
  // face blend of the crossed plateau inverses through the identity
  const double wp = prof_.chi.chi(eta), dwp = prof_.chi.dchi(eta);
  const double wm = prof_.chi.chi(-eta), dwm = -prof_.chi.dchi(-eta);
  BoundaryJet out = bj_zero(n, 2);
  if (wp > 0.0) {
    const PlateauInverse& pi = plateau_inverse(bc, theta, 1.0);
    BoundaryJet f;
    f.val = pi.coef[gamma].val;
    f.d = {pi.coef[gamma].d[0], bs_zero(n)};
    out = bj_add(out, bj_scalar(f, wp, {0.0, dwp}));
  }
  if (wm > 0.0) {
    const PlateauInverse& pi = plateau_inverse(bc, theta, -1.0);
    BoundaryJet f;
    f.val = pi.coef[gamma].val;
    f.d = {pi.coef[gamma].d[0], bs_zero(n)};
    out = bj_add(out, bj_scalar(f, wm, {0.0, dwm}));
  }
  double mid = 1.0 - wp - wm;
  if (gamma == 0 && mid != 0.0)
    out = bj_add(out, bj_scalar(bj_identity(n, 2), mid, {0.0, -dwp - dwm}));
  return out;
}

BoundaryJet GammaSymbol::boundary(int gamma, int bc, double theta, double eta,
                                  bool r_side) const {
  if (gamma < 0 || gamma >= act_.group.n)
    throw std::invalid_argument("boundary: gamma out of range");
  if (bc < 0 || bc >= ncomp())
    throw std::invalid_argument("boundary: component out of range");
  return r_side ? boundary_r(gamma, bc, theta, eta)
                : boundary_a(gamma, bc, theta, eta);
}

void GammaSymbol::check_interior(double tol) const {
  const int n = desc_.N, G = act_.group.n;
  const Chart& ch = geom_.charts[0];
  std::vector<RVec> pts;
  if (ch.dim == 1) {
    int sr = std::max<int>(1, int(ch.nodes[0].size()) / 9);
    for (int i = 0; i < ch.nodes[0].size(); i += sr) {
      RVec x(1);
      x << ch.nodes[0](i);
      pts.push_back(x);
    }
  } else {
    int sr = std::max<int>(1, int(ch.nodes[0].size()) / 7);
    int st = std::max<int>(1, int(ch.nodes[1].size()) / 7);
    for (int i = 0; i < ch.nodes[0].size(); i += sr)
      for (int j = 0; j < ch.nodes[1].size(); j += st) {
        RVec x(2);
        x << ch.nodes[0](i), ch.nodes[1](j);
        pts.push_back(x);
      }
  }
  const int ndir = ch.dim == 1 ? 2 : 12;
  for (const auto& x : pts)
    for (int k = 0; k < ndir; ++k) {
      RVec xi(ch.dim);
      if (ch.dim == 1)
        xi << (k == 0 ? 1.0 : -1.0);
      else {
        double phi = 2.0 * kPi * double(k) / double(ndir);
        xi << std::cos(phi), std::sin(phi);
      }
      Mat reg = Mat::Zero(n * G, n * G);
      for (int a = 0; a < G; ++a) {
        RVec xa = act_.map ? act_.map(a, 0, x) : x;
        Eigen::MatrixXd da = act_.dmap
                                 ? act_.dmap(a, 0, x)
                                 : Eigen::MatrixXd::Identity(ch.dim, ch.dim);
        // covectors pull back through the inverse transpose of the jacobian
        RVec xia = da.transpose().fullPivLu().solve(xi);
        for (int b = 0; b < G; ++b) {
          int g = act_.group.mult[a][act_.group.inverse[b]];
          reg.block(a * n, b * n, n, n) = interior(g, 0, xa, xia, false);
        }
      }
      Eigen::JacobiSVD<Mat> svd(reg);
      double smin = svd.singularValues().minCoeff();
      double smax = svd.singularValues().maxCoeff();
      if (smin < tol * std::max(1.0, smax)) {
        std::ostringstream os;
        os << "chart point (";
        for (int c = 0; c < ch.dim; ++c) os << (c ? "," : "") << fmt(x(c));
        os << ") direction (";
        for (int c = 0; c < ch.dim; ++c) os << (c ? "," : "") << fmt(xi(c));
        os << ")";
        throw NotInvertibleError("interior symbol not invertible", os.str());
      }
    }
}

namespace {

// Angles where a plateau winding factor with this angular winding crosses
// the negative real axis; the degenerate family vanishes exactly there.
void winding_probes(const BoundaryFamilyDesc& d, std::vector<double>& out) {
  if (d.kind == "winding" && d.k != 0) {
    for (int j = 0; j < std::abs(d.k); ++j)
      out.push_back((2.0 * j + 1.0) * kPi / double(std::abs(d.k)));
  }
  if (d.kind == "product")
    for (const auto& f : d.factors) winding_probes(f, out);
}

}  // namespace

void GammaSymbol::check_boundary() const {
  const int n = desc_.N, G = act_.group.n;
  for (int bc = 0; bc < ncomp(); ++bc) {
    const BoundaryChart& w = geom_.boundary[bc];
    std::vector<double> thetas{0.0};
    if (w.periodic) {
      thetas.clear();
      int step = std::max<int>(1, int(w.nodes.size()) / 24);
      for (int i = 0; i < w.nodes.size(); i += step) thetas.push_back(w.nodes(i));
      // probe the exact zero angles of degenerate winding factors
      for (const auto& t : desc_.terms) winding_probes(t.boundary[bc], thetas);
    }
    std::vector<double> etas =
        w.periodic ? std::vector<double>{1.0, -1.0, 1.7, -1.7, 2.6, -2.6}
                   : std::vector<double>{0.0};
    for (double th : thetas)
      for (double eta : etas) {
        std::vector<BoundarySymbol> val(size_t(G) * G, bs_zero(n));
        for (int a = 0; a < G; ++a) {
          int bc_a = bc;
          double th_a = th;
          map_boundary_point(a, bc, th, bc_a, th_a);
          for (int b = 0; b < G; ++b) {
            int g = act_.group.mult[a][act_.group.inverse[b]];
            val[size_t(a) * G + b] = boundary_a(g, bc_a, th_a, eta).val;
          }
        }
        BoundarySymbol reg = bs_assemble(val, G);
        std::ostringstream os;
        os << "component " << bc << " theta " << fmt(th) << " eta " << fmt(eta);
        Eigen::JacobiSVD<Mat> svd(reg.q);
        if (svd.singularValues().minCoeff() <
            1e-8 * std::max(1.0, svd.singularValues().maxCoeff()))
          throw NotInvertibleError("boundary symbol not invertible", os.str());
        invert_boundary(reg, os.str());
      }
  }
}

double GammaSymbol::compatibility_defect() const {
  double worst = 0.0;
  const std::vector<double> xins{-3.1, -1.2, -0.4, 0.27, 0.9, 2.2};
  for (int bc = 0; bc < ncomp(); ++bc) {
    const BoundaryChart& w = geom_.boundary[bc];
    const Chart& ch = geom_.charts[w.parent];
    std::vector<double> thetas{0.0};
    std::vector<double> etas{0.0};
    if (w.periodic) {
      thetas.clear();
      int step = std::max<int>(1, int(w.nodes.size()) / 8);
      for (int i = 0; i < w.nodes.size(); i += step) thetas.push_back(w.nodes(i));
      etas = {1.0, -1.0, 1.6, -1.6, 2.4, -2.4};
    }
    for (int gamma = 0; gamma < act_.group.n; ++gamma)
      for (double th : thetas)
        for (double eta : etas) {
          BoundaryJet f = boundary_a(gamma, bc, th, eta);
          for (double xin : xins) {
            Mat lhs = evaluate(f.val.a, cplx(xin, 0.0));
            RVec x(ch.dim), xi(ch.dim);
            if (ch.dim == 1) {
              x << w.boundary_value;
              xi << w.xn_sign * xin;
            } else {
              x << w.boundary_value, th;
              xi << w.xn_sign * xin, eta;
            }
            Mat rhs = interior(gamma, w.parent, x, xi, false);
            worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
          }
        }
  }
  return worst;
}

}  // namespace gbvp
