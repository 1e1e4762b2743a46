#include "gbvp/boundary_symbol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gbvp {

namespace {

RationalFn scalar_pole(cplx p, int order) {
  return RationalFn::pole_fn(p, Mat::Ones(1, 1), order);
}

// (xi - p)^{-order} on the n-dim identity.
RationalFn pole_block(cplx p, int order, int n) {
  return broadcast_scalar(scalar_pole(p, order), n);
}

double mat_mag(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Rough magnitude of a symbol, for relative tolerances.
double symbol_scale(const BoundarySymbol& s) {
  double sc = mat_mag(s.q) + s.a.scale() + s.c.scale() + s.b.scale();
  for (const auto& g : s.green) sc += g.u.scale() * g.v.scale();
  return sc;
}

const double kProbe[7] = {-2.65, -1.3, -0.45, 0.0, 0.5, 1.25, 2.8};

RationalFn slice_col(const RationalFn& f, int j) {
  RationalFn e(f.rows, 1);
  e.constant = f.constant.col(j);
  for (const auto& t : f.terms) {
    PoleTerm nt;
    nt.pole = t.pole;
    for (const auto& c : t.coef) nt.coef.push_back(c.col(j));
    e.terms.push_back(std::move(nt));
  }
  return canonical(e);
}

RationalFn slice_row(const RationalFn& f, int i) {
  RationalFn e(1, f.cols);
  e.constant = f.constant.row(i);
  for (const auto& t : f.terms) {
    PoleTerm nt;
    nt.pole = t.pole;
    for (const auto& c : t.coef) nt.coef.push_back(c.row(i));
    e.terms.push_back(std::move(nt));
  }
  return canonical(e);
}

// Exact coordinates of a family of leg functions: one slot per (pole, power)
// pair plus one for the value at infinity, dim entries per slot.  Linear
// algebra in these coordinates is linear algebra on the functions themselves,
// with no sampling involved.
struct LegBasis {
  std::vector<std::pair<cplx, int>> poles;  // location, highest power
  int dim = 1;
  int slots() const {
    int n = 1;
    for (const auto& p : poles) n += p.second;
    return n;
  }
  int slot(cplx p, int j) const {
    int off = 1;
    for (const auto& q : poles) {
      if (std::abs(q.first - p) < 1e-8 * (1.0 + std::abs(p))) return off + j;
      off += q.second;
    }
    return -1;
  }
};

LegBasis leg_basis(const std::vector<RationalFn>& fns, int dim) {
  LegBasis b;
  b.dim = dim;
  for (const auto& f : fns)
    for (const auto& t : f.terms) {
      bool found = false;
      for (auto& q : b.poles)
        if (std::abs(q.first - t.pole) < 1e-8 * (1.0 + std::abs(t.pole))) {
          q.second = std::max(q.second, int(t.coef.size()));
          found = true;
          break;
        }
      if (!found) b.poles.emplace_back(t.pole, int(t.coef.size()));
    }
  return b;
}

void fill_col(const LegBasis& b, const RationalFn& f,
              Eigen::Ref<Vec> col, bool row_vec) {
  const int d = b.dim;
  col.setZero();
  for (int e = 0; e < d; ++e)
    col(e) = row_vec ? f.constant(0, e) : f.constant(e, 0);
  for (const auto& t : f.terms)
    for (int j = 0; j < int(t.coef.size()); ++j) {
      int s = b.slot(t.pole, j);
      for (int e = 0; e < d; ++e)
        col(s * d + e) += row_vec ? t.coef[j](0, e) : t.coef[j](e, 0);
    }
}

RationalFn from_col(const LegBasis& b, const Vec& col, bool row_vec) {
  const int d = b.dim;
  RationalFn f = row_vec ? RationalFn(1, d) : RationalFn(d, 1);
  for (int e = 0; e < d; ++e)
    (row_vec ? f.constant(0, e) : f.constant(e, 0)) = col(e);
  int off = 1;
  for (const auto& q : b.poles) {
    PoleTerm t;
    t.pole = q.first;
    for (int j = 0; j < q.second; ++j) {
      Mat m = row_vec ? Mat::Zero(1, d) : Mat::Zero(d, 1);
      for (int e = 0; e < d; ++e)
        (row_vec ? m(0, e) : m(e, 0)) = col((off + j) * d + e);
      t.coef.push_back(std::move(m));
    }
    off += q.second;
    f.terms.push_back(std::move(t));
  }
  return canonical(f);
}

// One-sided rank reduction of the separable family sum_i primary_i (x) partner_i:
// factor the primary coefficient matrix S = U S V* and keep the leading
// singular directions; the combination weights flow onto the partner side
// conjugated, which leaves the bilinear sum unchanged up to the discarded
// singular values.
void svd_pass(std::vector<RationalFn>& primary, std::vector<RationalFn>& partner,
              bool primary_is_col, int dim) {
  const int N = int(primary.size());
  LegBasis bp = leg_basis(primary, dim);
  LegBasis bq = leg_basis(partner, dim);
  Mat S = Mat::Zero(bp.slots() * dim, N);
  Mat T = Mat::Zero(bq.slots() * dim, N);
  for (int i = 0; i < N; ++i) {
    fill_col(bp, primary[i], S.col(i), !primary_is_col);
    fill_col(bq, partner[i], T.col(i), primary_is_col);
  }
  Eigen::BDCSVD<Mat> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  int r = 0;
  while (r < int(sv.size()) && sv(r) > 1e-13 * smax) ++r;
  Mat B = svd.matrixU().leftCols(r) * sv.head(r).asDiagonal();
  Mat W = T * svd.matrixV().leftCols(r).conjugate();
  primary.clear();
  partner.clear();
  for (int k = 0; k < r; ++k) {
    primary.push_back(from_col(bp, B.col(k), !primary_is_col));
    partner.push_back(from_col(bq, W.col(k), primary_is_col));
  }
}

// Composition and inversion multiply the count of separable smoothing terms,
// but their total rank stays bounded by the pole data, so reduce the list to
// an equivalent one of minimal length before it snowballs.
std::vector<GreenTerm> compress_green(const std::vector<GreenTerm>& g, int dim) {
  std::vector<RationalFn> us, vs;
  for (const auto& t : g)
    for (int j = 0; j < t.u.cols; ++j) {
      RationalFn uc = slice_col(t.u, j);
      RationalFn vr = slice_row(t.v, j);
      if (uc.is_zero() || vr.is_zero()) continue;
      us.push_back(std::move(uc));
      vs.push_back(std::move(vr));
    }
  if (us.size() > 3) {
    svd_pass(us, vs, true, dim);
    svd_pass(vs, us, false, dim);
  }
  std::vector<GreenTerm> out;
  for (size_t i = 0; i < us.size(); ++i) out.push_back({us[i], vs[i]});
  return out;
}

}  // namespace

BoundarySymbol BoundarySymbol::identity(int n) {
  BoundarySymbol s(n);
  s.a = RationalFn::const_fn(Mat::Identity(n, n));
  s.q = Mat::Identity(n, n);
  return s;
}

void check_boundary_symbol(const BoundarySymbol& s, double tol) {
  const int n = s.dim;
  auto want = [&](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("boundary symbol: " + what);
  };
  want(s.a.rows == n && s.a.cols == n, "a shape");
  want(s.c.rows == n && s.c.cols == n, "c shape");
  want(s.b.rows == n && s.b.cols == n, "b shape");
  want(s.q.rows() == n && s.q.cols() == n, "q shape");
  want(is_hardy_plus(s.c, tol), "c must be upper");
  want(is_hardy_minus(s.b, tol), "b must be lower");
  for (const auto& g : s.green) {
    want(g.u.rows == n && g.v.cols == n && g.u.cols == g.v.rows, "green shape");
    want(is_hardy_plus(g.u, tol), "green u must be upper");
    want(is_hardy_minus(g.v, tol), "green v must be lower");
  }
}

BoundarySymbol bs_add(const BoundarySymbol& s1, const BoundarySymbol& s2) {
  if (s1.dim != s2.dim) throw std::invalid_argument("bs_add: dim mismatch");
  BoundarySymbol r(s1.dim);
  r.a = canonical(add(s1.a, s2.a));
  r.green = s1.green;
  r.green.insert(r.green.end(), s2.green.begin(), s2.green.end());
  r.c = canonical(add(s1.c, s2.c));
  r.b = canonical(add(s1.b, s2.b));
  r.q = s1.q + s2.q;
  return r;
}

BoundarySymbol bs_scale(const BoundarySymbol& s, cplx z) {
  BoundarySymbol r(s.dim);
  r.a = scale(s.a, z);
  for (const auto& g : s.green) r.green.push_back({scale(g.u, z), g.v});
  r.c = scale(s.c, z);
  r.b = scale(s.b, z);
  r.q = z * s.q;
  return r;
}

BoundarySymbol compose_boundary(const BoundarySymbol& s1, const BoundarySymbol& s2) {
  if (s1.dim != s2.dim) throw std::invalid_argument("compose_boundary: dim mismatch");
  const int n = s1.dim;
  BoundarySymbol r(n);
  r.a = canonical(mul(s1.a, s2.a));

  // Leftover of the rational parts: the plus-projection dropped when the
  // inner minus-part of a2 u hits a1.  One separable term per pole order
  // of each lower pole of a2.
  for (const auto& t : s2.a.terms) {
    if (t.pole.imag() >= 0.0) continue;
    const int L = int(t.coef.size());
    for (int m = 1; m <= L; ++m) {
      GreenTerm g;
      g.u = canonical(scale(pi_plus(mul(s1.a, pole_block(t.pole, m, n))), -1.0));
      RationalFn v(n, n);
      for (int l = m; l <= L; ++l)
        v = add(v, RationalFn::pole_fn(t.pole, kI * t.coef[l - 1], l - m + 1));
      g.v = canonical(v);
      if (g.u.is_zero() || g.v.is_zero()) continue;
      r.green.push_back(std::move(g));
    }
  }

  // Smoothing part of s1 behind the rational part of s2.
  for (const auto& g1 : s1.green) {
    GreenTerm g;
    g.u = g1.u;
    g.v = canonical(pi_minus(mul(g1.v, s2.a)));
    if (!g.v.is_zero()) r.green.push_back(std::move(g));
  }
  // Rational part of s1 in front of the smoothing part of s2.
  for (const auto& g2 : s2.green) {
    GreenTerm g;
    g.u = canonical(pi_plus(mul(s1.a, g2.u)));
    g.v = g2.v;
    if (!g.u.is_zero()) r.green.push_back(std::move(g));
  }
  // Smoothing after smoothing contracts through the regularized pairing.
  for (const auto& g1 : s1.green) {
    for (const auto& g2 : s2.green) {
      Mat k = pi_prime(mul(g1.v, g2.u));
      GreenTerm g;
      g.u = canonical(matmul(g1.u, k));
      g.v = g2.v;
      if (g.u.is_zero()) continue;
      r.green.push_back(std::move(g));
    }
  }
  // Potential of s1 following the trace of s2.
  if (!s1.c.is_zero() && !s2.b.is_zero()) r.green.push_back({s1.c, s2.b});

  RationalFn c = pi_plus(mul(s1.a, s2.c));
  for (const auto& g1 : s1.green)
    c = add(c, matmul(g1.u, pi_prime(mul(g1.v, s2.c))));
  c = add(c, matmul(s1.c, s2.q));
  r.c = canonical(c);

  RationalFn b = pi_minus(mul(s1.b, s2.a));
  for (const auto& g2 : s2.green)
    b = add(b, matmul(pi_prime(mul(s1.b, g2.u)), g2.v));
  b = add(b, matmul(s1.q, s2.b));
  r.b = canonical(b);

  r.q = s1.q * s2.q + pi_prime(mul(s1.b, s2.c));
  r.green = compress_green(r.green, n);
  return r;
}

std::pair<RationalFn, Vec> apply_boundary(const BoundarySymbol& s,
                                          const RationalFn& u, const Vec& v) {
  if (u.rows != s.dim || u.cols != 1 || v.size() != s.dim)
    throw std::invalid_argument("apply_boundary: shape mismatch");
  Mat vm = v;
  RationalFn w = pi_plus(mul(s.a, u));
  for (const auto& g : s.green) w = add(w, matmul(g.u, pi_prime(mul(g.v, u))));
  w = add(w, matmul(s.c, vm));
  Vec out = pi_prime(mul(s.b, u)).col(0) + s.q * v;
  return {canonical(w), out};
}

BoundarySymbol twisted_rescale(const BoundarySymbol& s, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("twisted_rescale: lambda <= 0");
  const double rt = 1.0 / std::sqrt(lambda);
  BoundarySymbol r(s.dim);
  r.a = dilate(s.a, lambda);
  for (const auto& g : s.green)
    r.green.push_back({scale(dilate(g.u, lambda), rt), scale(dilate(g.v, lambda), rt)});
  r.c = scale(dilate(s.c, lambda), rt);
  r.b = scale(dilate(s.b, lambda), rt);
  r.q = s.q;
  return r;
}

BoundarySymbol rescale_generator(const BoundarySymbol& s) {
  BoundarySymbol r(s.dim);
  r.a = ederiv(s.a);
  auto half_shift = [](const RationalFn& f) {
    return canonical(add(ederiv(f), scale(f, cplx(-0.5, 0.0))));
  };
  for (const auto& g : s.green) {
    // Product rule splits the -1/2 density weight over the two legs.
    r.green.push_back({half_shift(g.u), g.v});
    r.green.push_back({g.u, half_shift(g.v)});
  }
  r.c = half_shift(s.c);
  r.b = half_shift(s.b);
  r.q = Mat::Zero(s.dim, s.dim);
  return r;
}

Mat reg_trace(const BoundarySymbol& s) {
  Mat m = s.q;
  for (const auto& g : s.green) m += pi_prime(mul(g.u, g.v));
  return m;
}

cplx reg_trace_scalar(const BoundarySymbol& s) { return reg_trace(s).trace(); }

cplx trace_commutator(const BoundarySymbol& s1, const BoundarySymbol& s2) {
  return reg_trace_scalar(compose_boundary(s1, s2)) -
         reg_trace_scalar(compose_boundary(s2, s1));
}

double boundary_distance(const BoundarySymbol& s1, const BoundarySymbol& s2) {
  if (s1.dim != s2.dim) throw std::invalid_argument("boundary_distance: dim mismatch");
  const int n = s1.dim;
  double d = mat_mag(s1.q - s2.q);
  for (double x : kProbe) {
    d = std::max(d, mat_mag(evaluate(s1.a, x) - evaluate(s2.a, x)));
    d = std::max(d, mat_mag(evaluate(s1.c, x) - evaluate(s2.c, x)));
    d = std::max(d, mat_mag(evaluate(s1.b, x) - evaluate(s2.b, x)));
  }
  auto kernel = [n](const BoundarySymbol& s, double x, double y) {
    Mat k = Mat::Zero(n, n);
    for (const auto& g : s.green) k += evaluate(g.u, x) * evaluate(g.v, y);
    return k;
  };
  for (double x : kProbe)
    for (double y : kProbe)
      d = std::max(d, mat_mag(kernel(s1, x, y) - kernel(s2, x, y)));
  return d;
}

namespace {

// Truncated Taylor expansions at a point, coefficients f^(j)(p)/j!.
// Partial fraction re-expansion against the order n basis poles at +-i is
// exponentially ill conditioned in n, so every basis pairing below closes
// the contour toward the symbol's own poles instead; there the basis data
// enters through |w(p)| < 1 powers and stays tame at any order.
using Jet = std::vector<cplx>;

Jet jet_linear(cplx v0, int len) {
  Jet r(len, cplx(0.0));
  r[0] = v0;
  if (len > 1) r[1] = 1.0;
  return r;
}

Jet jet_mul(const Jet& a, const Jet& b) {
  Jet r(a.size(), cplx(0.0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; i + j < a.size() && j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

Jet jet_inv(const Jet& a) {
  Jet r(a.size(), cplx(0.0));
  r[0] = 1.0 / a[0];
  for (size_t k = 1; k < a.size(); ++k) {
    cplx s = 0.0;
    for (size_t j = 1; j <= k; ++j) s += a[j] * r[k - j];
    r[k] = -s * r[0];
  }
  return r;
}

// Jets of the conjugate basis functions phibar_m at an upper point p,
// for all m < nb: phibar_m = i sqrt(2) wbar^m / (xi + i), |wbar(p)| < 1.
std::vector<Jet> bar_jets(cplx p, int nb, int len) {
  Jet ia = jet_inv(jet_linear(p + kI, len));
  Jet wbar = jet_mul(jet_linear(p - kI, len), ia);
  Jet cur = ia;
  for (auto& v : cur) v *= kI * std::sqrt(2.0);
  std::vector<Jet> out;
  out.reserve(nb);
  for (int m = 0; m < nb; ++m) {
    out.push_back(cur);
    cur = jet_mul(cur, wbar);
  }
  return out;
}

// Jets of phihat_n at a lower point p: -i sqrt(2) w^n / (xi - i).
std::vector<Jet> hat_jets(cplx p, int nb, int len) {
  Jet ib = jet_inv(jet_linear(p - kI, len));
  Jet w = jet_mul(jet_linear(p + kI, len), ib);
  Jet cur = ib;
  for (auto& v : cur) v *= -kI * std::sqrt(2.0);
  std::vector<Jet> out;
  out.reserve(nb);
  for (int n = 0; n < nb; ++n) {
    out.push_back(cur);
    cur = jet_mul(cur, w);
  }
  return out;
}

// out[m] = Tr'[phibar_m f] for an upper decaying f: close the contour up,
// one residue per pole of f, basis derivatives from the jets.
std::vector<Mat> pair_bar(const RationalFn& f, int nb) {
  std::vector<Mat> out(nb, Mat::Zero(f.rows, f.cols));
  for (const auto& t : f.terms) {
    if (t.pole.imag() <= 0.0) continue;
    const int len = int(t.coef.size());
    auto jets = bar_jets(t.pole, nb, len);
    for (int m = 0; m < nb; ++m)
      for (int j = 0; j < len; ++j) out[m] += (kI * jets[m][j]) * t.coef[j];
  }
  return out;
}

// out[n] = Tr'[f phihat_n] for a lower decaying f: close the contour down.
std::vector<Mat> pair_hat(const RationalFn& f, int nb) {
  std::vector<Mat> out(nb, Mat::Zero(f.rows, f.cols));
  for (const auto& t : f.terms) {
    if (t.pole.imag() >= 0.0) continue;
    const int len = int(t.coef.size());
    auto jets = hat_jets(t.pole, nb, len);
    for (int n = 0; n < nb; ++n)
      for (int j = 0; j < len; ++j) out[n] += (-kI * jets[n][j]) * t.coef[j];
  }
  return out;
}

// Smoothing, potential, trace and summand blocks shared by both assemblies.
void fill_lower_blocks(const BoundarySymbol& s, int nb, Mat& m) {
  const int n = s.dim;
  for (const auto& g : s.green) {
    std::vector<Mat> p = pair_bar(g.u, nb);
    std::vector<Mat> qq = pair_hat(g.v, nb);
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nb; ++j)
        m.block(i * n, j * n, n, n) += p[i] * qq[j];
  }
  if (!s.c.is_zero()) {
    std::vector<Mat> col = pair_bar(s.c, nb);
    for (int i = 0; i < nb; ++i) m.block(i * n, nb * n, n, n) = col[i];
  }
  if (!s.b.is_zero()) {
    std::vector<Mat> row = pair_hat(s.b, nb);
    for (int j = 0; j < nb; ++j) m.block(nb * n, j * n, n, n) = row[j];
  }
  m.block(nb * n, nb * n, n, n) = s.q;
}

}  // namespace

Mat laguerre_matrix(const BoundarySymbol& s, int nb) {
  const int n = s.dim;
  const int total = n * (nb + 1);
  Mat m = Mat::Zero(total, total);

  // Toeplitz block from Fourier coefficients of a pulled back to the
  // Cayley circle; midpoint nodes avoid the point at infinity.  The
  // integrand is rational in exp(i theta) with poles off the unit circle,
  // so the periodic rule converges geometrically.
  const int kq = 4096;
  std::vector<Mat> vals(kq);
  std::vector<cplx> wconj(kq);
  for (int j = 0; j < kq; ++j) {
    double th = 2.0 * kPi * (j + 0.5) / kq;
    vals[j] = evaluate(s.a, 1.0 / std::tan(0.5 * th));
    wconj[j] = std::exp(cplx(0.0, -th));
  }
  std::vector<Mat> four(2 * nb - 1, Mat::Zero(n, n));
  for (int j = 0; j < kq; ++j) {
    cplx cur = std::pow(std::conj(wconj[j]), nb - 1);
    for (int k = 0; k < 2 * nb - 1; ++k) {
      four[k] += vals[j] * cur;
      cur *= wconj[j];
    }
  }
  for (auto& f : four) f /= double(kq);
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j)
      m.block(i * n, j * n, n, n) = four[(i - j) + (nb - 1)];

  fill_lower_blocks(s, nb, m);
  return m;
}

Mat laguerre_matrix_quadrature(const BoundarySymbol& s, int nb) {
  const int n = s.dim;
  const int total = n * (nb + 1);
  Mat m = Mat::Zero(total, total);

  // Gauss-Legendre on the tangent-compactified line.  The basis enters
  // only through pointwise values: phihat_n = -i sqrt2 w^n/(x - i) and
  // phibar_m = i sqrt2 w^{-m}/(x + i) with w = (x+i)/(x-i) unimodular, so
  // nothing here can blow up with the mode index.
  std::vector<double> gx, gw;
  gauss_legendre(2000, gx, gw);
  const double rt2 = std::sqrt(2.0);

  std::vector<Mat> toep(2 * nb - 1, Mat::Zero(n, n));
  std::vector<Mat> ccol(nb, Mat::Zero(n, n)), brow(nb, Mat::Zero(n, n));
  std::vector<std::vector<Mat>> gp, gq;
  for (const auto& g : s.green) {
    gp.emplace_back(nb, Mat::Zero(n, g.u.cols));
    gq.emplace_back(nb, Mat::Zero(g.u.cols, n));
  }

  for (size_t i = 0; i < gx.size(); ++i) {
    double t = 0.5 * kPi * gx[i];
    double x = std::tan(t);
    double sec2 = 1.0 / (std::cos(t) * std::cos(t));
    double wt = (0.5 * kPi * gw[i]) * sec2 / (2.0 * kPi);
    cplx zu = cplx(x, 1.0), zd = cplx(x, -1.0);
    cplx w = zu / zd;
    std::vector<cplx> hat(nb), bar(nb);
    cplx wh = -kI * rt2 / zd, wb = kI * rt2 / zu;
    for (int k = 0; k < nb; ++k) {
      hat[k] = wh;
      bar[k] = wb;
      wh *= w;
      wb /= w;
    }
    Mat av = evaluate(s.a, x);
    for (int d = -(nb - 1); d <= nb - 1; ++d) {
      // phihat_n phibar_m depends on n - m only: 2 w^{n-m}/(1+x^2).
      cplx f = hat[d >= 0 ? d : 0] * bar[d >= 0 ? 0 : -d];
      toep[d + (nb - 1)] += (wt * f) * av;
    }
    for (size_t tdx = 0; tdx < s.green.size(); ++tdx) {
      Mat uv = evaluate(s.green[tdx].u, x);
      Mat vv = evaluate(s.green[tdx].v, x);
      for (int k = 0; k < nb; ++k) {
        gp[tdx][k] += (wt * bar[k]) * uv;
        gq[tdx][k] += (wt * hat[k]) * vv;
      }
    }
    if (!s.c.is_zero()) {
      Mat cv = evaluate(s.c, x);
      for (int k = 0; k < nb; ++k) ccol[k] += (wt * bar[k]) * cv;
    }
    if (!s.b.is_zero()) {
      Mat bv = evaluate(s.b, x);
      for (int k = 0; k < nb; ++k) brow[k] += (wt * hat[k]) * bv;
    }
  }

  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) m.block(i * n, j * n, n, n) = toep[(j - i) + (nb - 1)];
  for (size_t tdx = 0; tdx < s.green.size(); ++tdx)
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nb; ++j)
        m.block(i * n, j * n, n, n) += gp[tdx][i] * gq[tdx][j];
  for (int i = 0; i < nb; ++i) m.block(i * n, nb * n, n, n) = ccol[i];
  for (int j = 0; j < nb; ++j) m.block(nb * n, j * n, n, n) = brow[j];
  m.block(nb * n, nb * n, n, n) = s.q;
  return m;
}

BoundarySymbol invert_boundary(const BoundarySymbol& s, const std::string& where) {
  const int n = s.dim;
  RationalFn rinv = rational_inverse(s.a, where);
  BoundarySymbol t(n);
  t.a = rinv;
  t.q = Mat::Identity(n, n);

  BoundarySymbol st = compose_boundary(s, t);
  double adev = 0.0;
  for (double x : kProbe)
    adev = std::max(adev, mat_mag(evaluate(st.a, x) - Mat::Identity(n, n)));
  if (adev > 1e-7 * (1.0 + s.a.scale()))
    throw NotInvertibleError("rational right inverse residual too large", where);

  // st = 1 + K with K of finite rank: K = sum_i g_i f_i where the index
  // runs over the separable terms, the summand input and the trace input.
  // Invert 1 + K through the Gram-type matrix M_{ij} = f_i(g_j).
  const int T = int(st.green.size());
  std::vector<int> off(T + 3, 0);
  for (int i = 0; i < T; ++i) off[i + 1] = off[i] + st.green[i].u.cols;
  off[T + 1] = off[T] + n;
  off[T + 2] = off[T + 1] + n;
  const int total = off[T + 2];
  const Mat qk = st.q - Mat::Identity(n, n);

  Mat gram = Mat::Zero(total, total);
  for (int i = 0; i < T; ++i) {
    const auto& gi = st.green[i];
    for (int j = 0; j < T; ++j)
      gram.block(off[i], off[j], gi.u.cols, st.green[j].u.cols) =
          pi_prime(mul(gi.v, st.green[j].u));
    if (!st.c.is_zero())
      gram.block(off[i], off[T], gi.u.cols, n) = pi_prime(mul(gi.v, st.c));
  }
  gram.block(off[T], off[T], n, n) = qk;
  gram.block(off[T], off[T + 1], n, n) = Mat::Identity(n, n);
  if (!st.b.is_zero()) {
    for (int j = 0; j < T; ++j)
      gram.block(off[T + 1], off[j], n, st.green[j].u.cols) =
          pi_prime(mul(st.b, st.green[j].u));
    if (!st.c.is_zero())
      gram.block(off[T + 1], off[T], n, n) = pi_prime(mul(st.b, st.c));
  }

  Eigen::FullPivLU<Mat> lu(Mat::Identity(total, total) + gram);
  if (!lu.isInvertible())
    throw NotInvertibleError("finite rank correction is singular", where);
  Mat ch = lu.inverse();

  // y = sum g_i ch_{ij} f_j, written back as a boundary symbol.
  BoundarySymbol y(n);
  auto chb = [&](int i, int j, int ri, int ci) { return ch.block(off[i], off[j], ri, ci); };
  for (int i = 0; i < T; ++i) {
    const int ki = st.green[i].u.cols;
    for (int j = 0; j < T; ++j) {
      Mat w = chb(i, j, ki, st.green[j].u.cols);
      GreenTerm g{canonical(matmul(st.green[i].u, w)), st.green[j].v};
      if (!g.u.is_zero()) y.green.push_back(std::move(g));
    }
    if (!st.b.is_zero()) {
      GreenTerm g{canonical(matmul(st.green[i].u, chb(i, T + 1, ki, n))), st.b};
      if (!g.u.is_zero()) y.green.push_back(std::move(g));
    }
  }
  if (!st.c.is_zero()) {
    for (int j = 0; j < T; ++j) {
      GreenTerm g{canonical(matmul(st.c, chb(T, j, n, st.green[j].u.cols))), st.green[j].v};
      if (!g.u.is_zero()) y.green.push_back(std::move(g));
    }
    if (!st.b.is_zero()) {
      GreenTerm g{canonical(matmul(st.c, chb(T, T + 1, n, n))), st.b};
      if (!g.u.is_zero()) y.green.push_back(std::move(g));
    }
  }
  {
    RationalFn cy(n, n);
    for (int i = 0; i < T; ++i)
      cy = add(cy, matmul(st.green[i].u, chb(i, T, st.green[i].u.cols, n)));
    if (!st.c.is_zero()) cy = add(cy, matmul(st.c, chb(T, T, n, n)));
    y.c = canonical(cy);
  }
  {
    RationalFn by(n, n);
    for (int j = 0; j < T; ++j) {
      Mat w = qk * chb(T, j, n, st.green[j].u.cols) + chb(T + 1, j, n, st.green[j].u.cols);
      by = add(by, matmul(w, st.green[j].v));
    }
    if (!st.b.is_zero())
      by = add(by, matmul(qk * chb(T, T + 1, n, n) + chb(T + 1, T + 1, n, n), st.b));
    y.b = canonical(by);
  }
  y.q = qk * chb(T, T, n, n) + chb(T + 1, T, n, n);
  y.green = compress_green(y.green, n);

  BoundarySymbol inv =
      compose_boundary(t, bs_add(BoundarySymbol::identity(n), bs_scale(y, -1.0)));

  const double rel = 1e-8 * (1.0 + symbol_scale(s)) * (1.0 + symbol_scale(inv));
  if (boundary_distance(compose_boundary(s, inv), BoundarySymbol::identity(n)) > rel)
    throw NotInvertibleError("right inverse certificate failed", where);
  if (boundary_distance(compose_boundary(inv, s), BoundarySymbol::identity(n)) > rel)
    throw NotInvertibleError("left inverse certificate failed", where);
  return inv;
}

}  // namespace gbvp
