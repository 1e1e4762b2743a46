// Sampled graded forms, the cone complex and the fundamental-class pairing.
// Numerics: spectral differentiation on periodic axes, order-8 finite
// differences elsewhere, Gregory end-corrected trapezoid quadrature.

#include "gbvp/forms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gbvp {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// Fornberg recursion: weights of the m-th derivative at x0 from nodes x.
std::vector<double> fd_weights(double x0, const std::vector<double>& x, int m) {
  const int nd = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(nd, std::vector<double>(m + 1, 0.0));
  c[0][0] = 1.0;
  double c1 = 1.0;
  double c4 = x[0] - x0;
  for (int i = 1; i < nd; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k)
        c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(nd);
  for (int j = 0; j < nd; ++j) w[j] = c[j][m];
  return w;
}

// First-derivative matrix in the stored coordinate.  Periodic axes get the
// exact spectral matrix, the rest 9-point stencils shifted at the ends.
Eigen::MatrixXd deriv_matrix(const Axis& a) {
  const int n = a.n;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  if (a.kind == AxisKind::periodic) {
    const double scale = 2.0 * kPi / (a.hi - a.lo);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double sgn = ((i - j) % 2 == 0) ? 1.0 : -1.0;
        const double t = kPi * double(i - j) / double(n);
        d(i, j) = (n % 2 == 0) ? scale * 0.5 * sgn / std::tan(t)
                               : scale * 0.5 * sgn / std::sin(t);
      }
    return d;
  }
  const int width = std::min(n, 9);
  std::vector<double> nodes(width);
  for (int i = 0; i < n; ++i) {
    const int s = std::clamp(i - (width - 1) / 2, 0, n - width);
    for (int k = 0; k < width; ++k) nodes[k] = a.node(s + k);
    const std::vector<double> w = fd_weights(a.node(i), nodes, 1);
    for (int k = 0; k < width; ++k) d(i, s + k) = w[k];
  }
  return d;
}

// Apply a real n x n operator along one axis of the flat storage.
Vec apply_axis_op(const FormBase& b, const Vec& v, int axis,
                  const Eigen::MatrixXd& op) {
  const int n = b.axes[axis].n;
  long inner = 1;
  for (int a = axis + 1; a < b.dim(); ++a) inner *= b.axes[a].n;
  const long outer = b.points() / (inner * n);
  Vec out(v.size());
  Eigen::VectorXd xr(n), xi(n);
  for (long o = 0; o < outer; ++o) {
    const long off = o * n * inner;
    for (long k = 0; k < inner; ++k) {
      for (int i = 0; i < n; ++i) {
        const cplx z = v[off + i * inner + k];
        xr[i] = z.real();
        xi[i] = z.imag();
      }
      const Eigen::VectorXd yr = op * xr;
      const Eigen::VectorXd yi = op * xi;
      for (int i = 0; i < n; ++i) out[off + i * inner + k] = cplx(yr[i], yi[i]);
    }
  }
  return out;
}

// parity of the number of pairs (i in I, j in J) with j < i; equal entries
// mean a repeated differential, reported as 0
int shuffle_sign(const std::vector<int>& I, const std::vector<int>& J) {
  int inv = 0;
  for (int i : I)
    for (int j : J) {
      if (i == j) return 0;
      if (j < i) ++inv;
    }
  return (inv % 2 == 0) ? 1 : -1;
}

std::vector<int> drop_and_renumber(const std::vector<int>& I, int axis) {
  std::vector<int> J;
  J.reserve(I.size());
  for (int v : I)
    if (v != axis) J.push_back(v > axis ? v - 1 : v);
  return J;
}

}  // namespace

double Axis::step() const {
  if (kind == AxisKind::periodic) return (hi - lo) / double(n);
  return (hi - lo) / double(n - 1);
}

double Axis::node(int i) const { return lo + double(i) * step(); }

long FormBase::chart_points() const {
  long p = 1;
  for (const Axis& a : axes) p *= a.n;
  return p;
}

long FormBase::points() const { return ncomp * chart_points(); }

bool FormBase::same_layout(const FormBase& o) const {
  if (ncomp != o.ncomp || axes.size() != o.axes.size()) return false;
  for (size_t a = 0; a < axes.size(); ++a) {
    const Axis& x = axes[a];
    const Axis& y = o.axes[a];
    const double tol = 1e-12 * (1.0 + std::abs(x.lo) + std::abs(x.hi));
    if (x.kind != y.kind || x.n != y.n) return false;
    if (std::abs(x.lo - y.lo) > tol || std::abs(x.hi - y.hi) > tol)
      return false;
  }
  return true;
}

int binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return static_cast<int>(r);
}

std::vector<std::vector<int>> multi_indices(int dim, int j) {
  std::vector<std::vector<int>> out;
  if (j < 0 || j > dim) return out;
  std::vector<int> cur(j);
  for (int i = 0; i < j; ++i) cur[i] = i;
  while (true) {
    out.push_back(cur);
    int a = j - 1;
    while (a >= 0 && cur[a] == dim - j + a) --a;
    if (a < 0) break;
    ++cur[a];
    for (int t = a + 1; t < j; ++t) cur[t] = cur[t - 1] + 1;
  }
  return out;
}

int multi_rank(int dim, const std::vector<int>& idx) {
  const auto all = multi_indices(dim, static_cast<int>(idx.size()));
  for (int i = 0; i < static_cast<int>(all.size()); ++i)
    if (all[i] == idx) return i;
  throw std::invalid_argument("multi_rank: not an increasing multi-index");
}

long flat_index(const FormBase& b, int comp, const std::vector<int>& iv) {
  long f = comp;
  for (int a = 0; a < b.dim(); ++a) f = f * b.axes[a].n + iv[a];
  return f;
}

Eigen::VectorXd quad_weights(const Axis& a) {
  Eigen::VectorXd w(a.n);
  const double h = a.step();
  if (a.kind == AxisKind::periodic) {
    w.setConstant(h);
    return w;
  }
  w.setConstant(h);
  w[0] = 0.5 * h;
  w[a.n - 1] = 0.5 * h;
  if (a.n >= 10) {
    static const double g[5] = {95.0 / 288.0, 317.0 / 240.0, 23.0 / 30.0,
                                793.0 / 720.0, 157.0 / 160.0};
    for (int k = 0; k < 5; ++k) {
      w[k] = g[k] * h;
      w[a.n - 1 - k] = g[k] * h;
    }
  } else if (a.n >= 6) {
    static const double g[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
    for (int k = 0; k < 3; ++k) {
      w[k] = g[k] * h;
      w[a.n - 1 - k] = g[k] * h;
    }
  }
  return w;
}

GradedForm GradedForm::zero(const FormBase& b) {
  GradedForm w;
  w.base = b;
  w.deg.resize(b.dim() + 1);
  for (int j = 0; j <= b.dim(); ++j) w.deg[j].resize(binom(b.dim(), j));
  w.compact = true;
  w.support = 0.0;
  return w;
}

Vec& GradedForm::at(int j, int c) {
  Vec& v = deg.at(j).at(c);
  if (v.size() == 0) v = Vec::Zero(base.points());
  return v;
}

const Vec& GradedForm::get(int j, int c) const { return deg.at(j).at(c); }

bool GradedForm::has(int j, int c) const {
  if (j < 0 || j >= static_cast<int>(deg.size())) return false;
  return deg[j][c].size() > 0;
}

int GradedForm::top() const {
  for (int j = static_cast<int>(deg.size()) - 1; j >= 0; --j)
    for (const Vec& v : deg[j])
      if (v.size() > 0 && v.cwiseAbs().maxCoeff() > 0.0) return j;
  return -1;
}

double GradedForm::max_norm() const {
  double m = 0.0;
  for (const auto& slots : deg)
    for (const Vec& v : slots)
      if (v.size() > 0) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

void GradedForm::prune(double tol) {
  for (auto& slots : deg)
    for (Vec& v : slots)
      if (v.size() > 0 && v.cwiseAbs().maxCoeff() <= tol) v.resize(0);
}

GradedForm operator+(const GradedForm& a, const GradedForm& b) {
  require(a.base.same_layout(b.base), "form sum: base layout mismatch");
  GradedForm out = GradedForm::zero(a.base);
  out.compact = a.compact && b.compact;
  out.support = out.compact ? std::max(a.support, b.support) : 0.0;
  for (int j = 0; j < static_cast<int>(out.deg.size()); ++j)
    for (int c = 0; c < static_cast<int>(out.deg[j].size()); ++c) {
      const bool ha = a.has(j, c);
      const bool hb = b.has(j, c);
      if (!ha && !hb) continue;
      Vec& v = out.at(j, c);
      if (ha) v += a.deg[j][c];
      if (hb) v += b.deg[j][c];
    }
  return out;
}

GradedForm operator-(const GradedForm& a, const GradedForm& b) {
  return a + (cplx(-1.0) * b);
}

GradedForm operator*(const cplx& s, const GradedForm& w) {
  GradedForm out = w;
  for (auto& slots : out.deg)
    for (Vec& v : slots)
      if (v.size() > 0) v *= s;
  return out;
}

Vec grid_sample(const FormBase& b,
                const std::function<cplx(int, const RVec&)>& f) {
  Vec out(b.points());
  const int dim = b.dim();
  const long chart = b.chart_points();
  std::vector<int> iv(dim, 0);
  RVec x(dim);
  long idx = 0;
  for (int comp = 0; comp < b.ncomp; ++comp) {
    std::fill(iv.begin(), iv.end(), 0);
    for (long p = 0; p < chart; ++p) {
      for (int a = 0; a < dim; ++a) x[a] = b.axes[a].node(iv[a]);
      out[idx++] = f(comp, x);
      for (int a = dim - 1; a >= 0; --a) {
        if (++iv[a] < b.axes[a].n) break;
        iv[a] = 0;
      }
    }
  }
  return out;
}

GradedForm exterior_derivative(const GradedForm& w) {
  GradedForm out = GradedForm::zero(w.base);
  out.compact = w.compact;
  out.support = w.support;
  const int dim = w.base.dim();
  std::vector<Eigen::MatrixXd> dmat(dim);
  std::vector<bool> built(dim, false);
  for (int j = 0; j < dim; ++j) {
    const auto idx = multi_indices(dim, j);
    for (int c = 0; c < static_cast<int>(idx.size()); ++c) {
      if (!w.has(j, c)) continue;
      const std::vector<int>& I = idx[c];
      for (int a = 0; a < dim; ++a) {
        if (std::binary_search(I.begin(), I.end(), a)) continue;
        if (!built[a]) {
          dmat[a] = deriv_matrix(w.base.axes[a]);
          built[a] = true;
        }
        std::vector<int> K(I);
        const auto pos = std::lower_bound(K.begin(), K.end(), a);
        const int t = static_cast<int>(pos - K.begin());
        K.insert(pos, a);
        const Vec df = apply_axis_op(w.base, w.deg[j][c], a, dmat[a]);
        Vec& dst = out.at(j + 1, multi_rank(dim, K));
        if (t % 2 == 0)
          dst += df;
        else
          dst -= df;
      }
    }
  }
  return out;
}

GradedForm wedge_forms(const GradedForm& a, const GradedForm& b) {
  require(a.base.same_layout(b.base) && a.base.tag == b.base.tag,
          "wedge: factors live on different bases");
  const int dim = a.base.dim();
  GradedForm out = GradedForm::zero(a.base);
  out.compact = a.compact || b.compact;
  if (out.compact) {
    double s = std::numeric_limits<double>::infinity();
    if (a.compact) s = std::min(s, a.support);
    if (b.compact) s = std::min(s, b.support);
    out.support = s;
  }
  for (int ja = 0; ja <= dim; ++ja) {
    const auto ia = multi_indices(dim, ja);
    for (int ca = 0; ca < static_cast<int>(ia.size()); ++ca) {
      if (!a.has(ja, ca)) continue;
      for (int jb = 0; jb + ja <= dim; ++jb) {
        const auto ib = multi_indices(dim, jb);
        for (int cb = 0; cb < static_cast<int>(ib.size()); ++cb) {
          if (!b.has(jb, cb)) continue;
          const int sgn = shuffle_sign(ia[ca], ib[cb]);
          if (sgn == 0) continue;
          std::vector<int> K(ia[ca]);
          K.insert(K.end(), ib[cb].begin(), ib[cb].end());
          std::sort(K.begin(), K.end());
          Vec& dst = out.at(ja + jb, multi_rank(dim, K));
          const Vec prod =
              (a.deg[ja][ca].array() * b.deg[jb][cb].array()).matrix();
          if (sgn > 0)
            dst += prod;
          else
            dst -= prod;
        }
      }
    }
  }
  return out;
}

cplx integrate_top(const GradedForm& w) {
  const int dim = w.base.dim();
  if (!w.has(dim, 0)) return cplx(0.0);
  const Vec& f = w.deg[dim][0];
  std::vector<Eigen::VectorXd> qw;
  qw.reserve(dim);
  for (const Axis& a : w.base.axes) qw.push_back(quad_weights(a));
  const long chart = w.base.chart_points();
  std::vector<int> iv(dim, 0);
  cplx total = 0.0;
  for (int comp = 0; comp < w.base.ncomp; ++comp) {
    std::fill(iv.begin(), iv.end(), 0);
    for (long p = 0; p < chart; ++p) {
      double weight = 1.0;
      for (int a = 0; a < dim; ++a) weight *= qw[a][iv[a]];
      total += weight * f[comp * chart + p];
      for (int a = dim - 1; a >= 0; --a) {
        if (++iv[a] < w.base.axes[a].n) break;
        iv[a] = 0;
      }
    }
  }
  return total;
}

double support_defect(const GradedForm& w) {
  const int dim = w.base.dim();
  std::vector<int> fib;
  for (int a = 0; a < dim; ++a)
    if (w.base.axes[a].kind == AxisKind::fiber) fib.push_back(a);
  if (fib.empty()) return 0.0;
  const long chart = w.base.chart_points();
  std::vector<int> iv(dim, 0);
  double worst = 0.0;
  for (const auto& slots : w.deg)
    for (const Vec& f : slots) {
      if (f.size() == 0) continue;
      std::fill(iv.begin(), iv.end(), 0);
      for (long p = 0; p < chart; ++p) {
        bool shell = false;
        for (int a : fib)
          if (iv[a] == 0 || iv[a] == w.base.axes[a].n - 1) {
            shell = true;
            break;
          }
        if (shell)
          for (int comp = 0; comp < w.base.ncomp; ++comp)
            worst = std::max(worst, std::abs(f[comp * chart + p]));
        for (int a = dim - 1; a >= 0; --a) {
          if (++iv[a] < w.base.axes[a].n) break;
          iv[a] = 0;
        }
      }
    }
  return worst;
}

GradedForm fiber_integration(const GradedForm& w, int axis,
                             std::vector<double> comp_sign) {
  const FormBase& b = w.base;
  const int dim = b.dim();
  require(axis >= 0 && axis < dim, "fiber integration: axis out of range");
  require(b.axes[axis].kind == AxisKind::fiber,
          "fiber integration: not a fiber-kind axis");
  require(w.compact, "fiber integration: compact support not declared");
  const Axis& ax = b.axes[axis];
  require(ax.lo <= -w.support + 1e-12 && ax.hi >= w.support - 1e-12,
          "fiber integration: declared support exceeds the axis range");
  if (comp_sign.empty()) comp_sign.assign(b.ncomp, 1.0);
  require(static_cast<int>(comp_sign.size()) == b.ncomp,
          "fiber integration: one orientation factor per component");

  FormBase nb;
  nb.tag = b.tag + "|fiber";
  nb.ncomp = b.ncomp;
  for (int a = 0; a < dim; ++a)
    if (a != axis) nb.axes.push_back(b.axes[a]);
  GradedForm out = GradedForm::zero(nb);
  out.compact = true;
  out.support = w.support;

  const Eigen::VectorXd qw = quad_weights(ax);
  long inner = 1;
  for (int a = axis + 1; a < dim; ++a) inner *= b.axes[a].n;
  const long chart_in = b.chart_points();
  const long chart_out = nb.chart_points();
  const long outer = chart_in / (inner * ax.n);

  for (int j = 1; j <= dim; ++j) {
    const auto idx = multi_indices(dim, j);
    for (int c = 0; c < static_cast<int>(idx.size()); ++c) {
      if (!w.has(j, c)) continue;
      const std::vector<int>& I = idx[c];
      const auto it = std::find(I.begin(), I.end(), axis);
      if (it == I.end()) continue;
      // fiber differential pulled to the front of the multi-index
      const int p = static_cast<int>(it - I.begin());
      const double front = (p % 2 == 0) ? 1.0 : -1.0;
      const Vec& f = w.deg[j][c];
      Vec& dst = out.at(j - 1, multi_rank(dim - 1, drop_and_renumber(I, axis)));
      for (int comp = 0; comp < b.ncomp; ++comp) {
        const double cs = front * comp_sign[comp];
        const long src0 = comp * chart_in;
        const long dst0 = comp * chart_out;
        for (long o = 0; o < outer; ++o)
          for (int i = 0; i < ax.n; ++i) {
            const double wq = cs * qw[i];
            const long s = src0 + (o * ax.n + i) * inner;
            const long d = dst0 + o * inner;
            for (long k = 0; k < inner; ++k) dst[d + k] += wq * f[s + k];
          }
      }
    }
  }
  return out;
}

GradedForm restrict_boundary(const GradedForm& w, int collar_axis,
                             const std::vector<int>& at_hi,
                             const std::string& tag) {
  const FormBase& b = w.base;
  const int dim = b.dim();
  require(collar_axis >= 0 && collar_axis < dim,
          "restriction: collar axis out of range");
  require(b.axes[collar_axis].kind == AxisKind::line,
          "restriction: collar must be a line axis");
  require(b.ncomp == 1, "restriction: source must be connected");
  require(!at_hi.empty(), "restriction: no walls requested");

  FormBase nb;
  nb.tag = tag;
  nb.ncomp = static_cast<int>(at_hi.size());
  for (int a = 0; a < dim; ++a)
    if (a != collar_axis) nb.axes.push_back(b.axes[a]);
  GradedForm out = GradedForm::zero(nb);
  out.compact = w.compact;
  out.support = w.support;

  const int nc = b.axes[collar_axis].n;
  long inner = 1;
  for (int a = collar_axis + 1; a < dim; ++a) inner *= b.axes[a].n;
  const long chart_out = nb.chart_points();
  const long outer = b.chart_points() / (inner * nc);

  for (int j = 0; j < static_cast<int>(w.deg.size()); ++j) {
    const auto idx = multi_indices(dim, j);
    for (int c = 0; c < static_cast<int>(idx.size()); ++c) {
      if (!w.has(j, c)) continue;
      const std::vector<int>& I = idx[c];
      if (std::binary_search(I.begin(), I.end(), collar_axis)) continue;
      const Vec& f = w.deg[j][c];
      Vec& dst =
          out.at(j, multi_rank(dim - 1, drop_and_renumber(I, collar_axis)));
      for (int comp = 0; comp < nb.ncomp; ++comp) {
        const int wall = at_hi[comp] ? nc - 1 : 0;
        for (long o = 0; o < outer; ++o) {
          const long s = (o * nc + wall) * inner;
          const long d = comp * chart_out + o * inner;
          for (long k = 0; k < inner; ++k) dst[d + k] = f[s + k];
        }
      }
    }
  }
  return out;
}

double compatibility_defect(const GradedForm& m, const GradedForm& x,
                            const Fibration& fib) {
  const GradedForm s =
      restrict_boundary(m, fib.collar_axis, fib.at_hi, "wall");
  const int q =
      fib.conormal_axis - (fib.conormal_axis > fib.collar_axis ? 1 : 0);
  const int sd = s.base.dim();
  require(x.base.ncomp == s.base.ncomp,
          "compatibility: component count mismatch");
  FormBase probe;
  probe.ncomp = s.base.ncomp;
  for (int a = 0; a < sd; ++a)
    if (a != q) probe.axes.push_back(s.base.axes[a]);
  require(probe.same_layout(x.base), "compatibility: wall layout mismatch");

  const int nq = s.base.axes[q].n;
  long inner = 1;
  for (int a = q + 1; a < sd; ++a) inner *= s.base.axes[a].n;
  const long chart_s = s.base.chart_points();
  const long chart_x = x.base.chart_points();
  const long outer = chart_s / (inner * nq);

  double worst = 0.0;
  for (int j = 0; j < static_cast<int>(s.deg.size()); ++j) {
    const auto idx = multi_indices(sd, j);
    for (int c = 0; c < static_cast<int>(idx.size()); ++c) {
      const std::vector<int>& I = idx[c];
      const bool has_conormal = std::binary_search(I.begin(), I.end(), q);
      if (has_conormal) {
        // the pullback from X carries no conormal differential
        if (s.has(j, c))
          worst = std::max(worst, s.deg[j][c].cwiseAbs().maxCoeff());
        continue;
      }
      const int cx = multi_rank(sd - 1, drop_and_renumber(I, q));
      const bool hs = s.has(j, c);
      const bool hx = x.has(j, cx);
      if (!hs && !hx) continue;
      for (int comp = 0; comp < s.base.ncomp; ++comp)
        for (long o = 0; o < outer; ++o)
          for (int i = 0; i < nq; ++i)
            for (long k = 0; k < inner; ++k) {
              const cplx sv =
                  hs ? s.deg[j][c][comp * chart_s + (o * nq + i) * inner + k]
                     : cplx(0.0);
              const cplx xv =
                  hx ? x.deg[j][cx][comp * chart_x + o * inner + k]
                     : cplx(0.0);
              worst = std::max(worst, std::abs(sv - xv));
            }
    }
  }
  return worst;
}

ConeCochain cone_differential(const ConeCochain& c) {
  ConeCochain out;
  out.fib = c.fib;
  out.nu = c.nu;
  out.m_part = exterior_derivative(c.m_part);
  const double sx = ((c.nu + 1) % 2 == 0) ? 1.0 : -1.0;
  GradedForm xnew = cplx(sx) * exterior_derivative(c.x_part);
  if (c.m_part.top() >= 0) {
    GradedForm slice = restrict_boundary(c.m_part, c.fib.collar_axis,
                                         c.fib.at_hi, c.x_part.base.tag);
    const int q =
        c.fib.conormal_axis - (c.fib.conormal_axis > c.fib.collar_axis ? 1 : 0);
    // wall factor: induced boundary orientation of the wall inside the chart
    // order, times the front-pulled conormal slot
    std::vector<double> s(c.fib.at_hi.size());
    for (size_t i = 0; i < s.size(); ++i) {
      const double outward = c.fib.at_hi[i] ? 1.0 : -1.0;
      const double collar_pos = (c.fib.collar_axis % 2 == 0) ? 1.0 : -1.0;
      const double conormal_pos = (q % 2 == 0) ? 1.0 : -1.0;
      s[i] = outward * collar_pos * conormal_pos;
    }
    GradedForm pushed = fiber_integration(slice, q, s);
    require(pushed.base.same_layout(c.x_part.base),
            "cone differential: fibration does not match the x side");
    pushed.base = c.x_part.base;
    xnew = xnew - pushed;
  }
  out.x_part = xnew;
  return out;
}

CompatiblePair pair_differential(const CompatiblePair& p) {
  CompatiblePair out;
  out.fib = p.fib;
  out.m_part = exterior_derivative(p.m_part);
  out.x_part = exterior_derivative(p.x_part);
  return out;
}

ConeCochain wedge(const ConeCochain& c, const CompatiblePair& p) {
  ConeCochain out;
  out.fib = c.fib;
  out.nu = c.nu;
  out.m_part = wedge_forms(c.m_part, p.m_part);
  out.x_part = wedge_forms(c.x_part, p.x_part);
  return out;
}

CompatiblePair wedge_pair(const CompatiblePair& a, const CompatiblePair& b) {
  CompatiblePair out;
  out.fib = a.fib;
  out.m_part = wedge_forms(a.m_part, b.m_part);
  out.x_part = wedge_forms(a.x_part, b.x_part);
  return out;
}

cplx pair_fundamental(const ConeCochain& c) {
  const auto has_fiber = [](const FormBase& b) {
    for (const Axis& a : b.axes)
      if (a.kind == AxisKind::fiber) return true;
    return false;
  };
  if (has_fiber(c.m_part.base))
    require(c.m_part.compact, "pairing: m side lacks the compact flag");
  if (has_fiber(c.x_part.base))
    require(c.x_part.compact, "pairing: x side lacks the compact flag");
  return integrate_top(c.m_part) + integrate_top(c.x_part);
}

}  // namespace gbvp
