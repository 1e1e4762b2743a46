#include <gbvp/rational.hpp>

#include <algorithm>
#include <functional>
#include <numeric>

namespace gbvp {

void check_pole(cplx p) {
  if (std::abs(p.imag()) < kPoleImagMin)
    throw std::invalid_argument("pole too close to the real axis: Im = " +
                                std::to_string(p.imag()));
}

RationalFn RationalFn::const_fn(const Mat& m) {
  RationalFn f(int(m.rows()), int(m.cols()));
  f.constant = m;
  return f;
}

RationalFn RationalFn::zero_fn(int r, int c) { return RationalFn(r, c); }

RationalFn RationalFn::pole_fn(cplx p, const Mat& r, int order) {
  check_pole(p);
  if (order < 1) throw std::invalid_argument("pole order must be >= 1");
  RationalFn f(int(r.rows()), int(r.cols()));
  PoleTerm t;
  t.pole = p;
  t.coef.assign(order, Mat::Zero(r.rows(), r.cols()));
  t.coef[order - 1] = r;
  f.terms.push_back(std::move(t));
  return f;
}

double RationalFn::scale() const {
  double s = constant.cwiseAbs().maxCoeff();
  for (const auto& t : terms)
    for (const auto& c : t.coef) s = std::max(s, c.cwiseAbs().maxCoeff());
  return s;
}

bool RationalFn::is_zero(double tol) const {
  double s = scale();
  return s <= tol;
}

RationalFn canonical(const RationalFn& f) {
  RationalFn g(f.rows, f.cols);
  g.constant = f.constant;
  // Merge poles pairwise within tolerance.
  std::vector<PoleTerm> merged;
  for (const auto& t : f.terms) {
    bool found = false;
    for (auto& m : merged) {
      if (std::abs(m.pole - t.pole) <= kPoleMergeTol * (1.0 + std::abs(t.pole))) {
        if (t.coef.size() > m.coef.size())
          m.coef.resize(t.coef.size(), Mat::Zero(f.rows, f.cols));
        for (size_t j = 0; j < t.coef.size(); ++j) m.coef[j] += t.coef[j];
        found = true;
        break;
      }
    }
    if (!found) merged.push_back(t);
  }
  // Prune negligible coefficients relative to the overall scale.
  double s = f.scale();
  double tol = kCoeffPruneTol * (1.0 + s);
  for (auto& m : merged) {
    while (!m.coef.empty() && m.coef.back().cwiseAbs().maxCoeff() <= tol)
      m.coef.pop_back();
    for (auto& c : m.coef)
      if (c.cwiseAbs().maxCoeff() <= tol) c.setZero();
    if (!m.coef.empty()) g.terms.push_back(std::move(m));
  }
  std::sort(g.terms.begin(), g.terms.end(), [](const PoleTerm& a, const PoleTerm& b) {
    if (a.pole.imag() != b.pole.imag()) return a.pole.imag() < b.pole.imag();
    return a.pole.real() < b.pole.real();
  });
  return g;
}

RationalFn add(const RationalFn& f, const RationalFn& g) {
  if (f.rows != g.rows || f.cols != g.cols)
    throw std::invalid_argument("rational add: shape mismatch");
  RationalFn h(f.rows, f.cols);
  h.constant = f.constant + g.constant;
  h.terms = f.terms;
  h.terms.insert(h.terms.end(), g.terms.begin(), g.terms.end());
  return canonical(h);
}

RationalFn sub(const RationalFn& f, const RationalFn& g) {
  return add(f, scale(g, cplx(-1.0, 0.0)));
}

RationalFn scale(const RationalFn& f, cplx s) {
  RationalFn h = f;
  h.constant *= s;
  for (auto& t : h.terms)
    for (auto& c : t.coef) c *= s;
  return h;
}

RationalFn matmul(const Mat& m, const RationalFn& f) {
  if (m.cols() != f.rows) throw std::invalid_argument("matmul: shape mismatch");
  RationalFn h(int(m.rows()), f.cols);
  h.constant = m * f.constant;
  h.terms = f.terms;
  for (auto& t : h.terms)
    for (auto& c : t.coef) c = (m * c).eval();
  return canonical(h);
}

RationalFn matmul(const RationalFn& f, const Mat& m) {
  if (f.cols != m.rows()) throw std::invalid_argument("matmul: shape mismatch");
  RationalFn h(f.rows, int(m.cols()));
  h.constant = f.constant * m;
  h.terms = f.terms;
  for (auto& t : h.terms)
    for (auto& c : t.coef) c = (c * m).eval();
  return canonical(h);
}

namespace {

// Accumulate the partial-fraction expansion of R (xi-p)^{-a} S (xi-q)^{-b}
// for distinct p, q into out.  The scalar weights are the standard binomial
// re-expansion coefficients.
void cross_expand(const Mat& RS, cplx p, int a, cplx q, int b,
                  std::vector<PoleTerm>& out) {
  PoleTerm tp, tq;
  tp.pole = p;
  tp.coef.assign(a, Mat::Zero(RS.rows(), RS.cols()));
  tq.pole = q;
  tq.coef.assign(b, Mat::Zero(RS.rows(), RS.cols()));
  for (int m = 1; m <= a; ++m) {
    double sgn = ((a - m) % 2 == 0) ? 1.0 : -1.0;
    cplx w = sgn * binomial(a + b - m - 1, a - m) / std::pow(p - q, double(a + b - m));
    tp.coef[m - 1] += w * RS;
  }
  for (int m = 1; m <= b; ++m) {
    double sgn = ((b - m) % 2 == 0) ? 1.0 : -1.0;
    cplx w = sgn * binomial(a + b - m - 1, b - m) / std::pow(q - p, double(a + b - m));
    tq.coef[m - 1] += w * RS;
  }
  out.push_back(std::move(tp));
  out.push_back(std::move(tq));
}

}  // namespace

RationalFn mul(const RationalFn& f, const RationalFn& g) {
  if (f.cols != g.rows) throw std::invalid_argument("rational mul: shape mismatch");
  RationalFn h(f.rows, g.cols);
  h.constant = f.constant * g.constant;
  // constant x pole and pole x constant parts
  for (const auto& t : g.terms) {
    PoleTerm nt;
    nt.pole = t.pole;
    for (const auto& c : t.coef) nt.coef.push_back(f.constant * c);
    h.terms.push_back(std::move(nt));
  }
  for (const auto& t : f.terms) {
    PoleTerm nt;
    nt.pole = t.pole;
    for (const auto& c : t.coef) nt.coef.push_back(c * g.constant);
    h.terms.push_back(std::move(nt));
  }
  // pole x pole parts
  for (const auto& tf : f.terms) {
    for (const auto& tg : g.terms) {
      bool same = std::abs(tf.pole - tg.pole) <=
                  kPoleMergeTol * (1.0 + std::abs(tf.pole));
      if (same) {
        cplx p = 0.5 * (tf.pole + tg.pole);
        PoleTerm nt;
        nt.pole = p;
        nt.coef.assign(tf.coef.size() + tg.coef.size(),
                       Mat::Zero(f.rows, g.cols));
        for (size_t i = 0; i < tf.coef.size(); ++i)
          for (size_t j = 0; j < tg.coef.size(); ++j)
            nt.coef[i + j + 1] += tf.coef[i] * tg.coef[j];
        h.terms.push_back(std::move(nt));
      } else {
        for (size_t i = 0; i < tf.coef.size(); ++i) {
          for (size_t j = 0; j < tg.coef.size(); ++j) {
            Mat RS = tf.coef[i] * tg.coef[j];
            if (RS.cwiseAbs().maxCoeff() == 0.0) continue;
            cross_expand(RS, tf.pole, int(i) + 1, tg.pole, int(j) + 1, h.terms);
          }
        }
      }
    }
  }
  return canonical(h);
}

RationalFn derivative(const RationalFn& f) {
  RationalFn h(f.rows, f.cols);
  for (const auto& t : f.terms) {
    PoleTerm nt;
    nt.pole = t.pole;
    nt.coef.assign(t.coef.size() + 1, Mat::Zero(f.rows, f.cols));
    for (size_t j = 0; j < t.coef.size(); ++j)
      nt.coef[j + 1] = -double(j + 1) * t.coef[j];
    h.terms.push_back(std::move(nt));
  }
  return canonical(h);
}

RationalFn ederiv(const RationalFn& f) {
  // -xi f'(xi) = sum_m m c_m [ (xi-p)^{-m} + p (xi-p)^{-m-1} ]
  RationalFn h(f.rows, f.cols);
  for (const auto& t : f.terms) {
    PoleTerm nt;
    nt.pole = t.pole;
    nt.coef.assign(t.coef.size() + 1, Mat::Zero(f.rows, f.cols));
    for (size_t j = 0; j < t.coef.size(); ++j) {
      double m = double(j + 1);
      nt.coef[j] += m * t.coef[j];
      nt.coef[j + 1] += m * t.pole * t.coef[j];
    }
    h.terms.push_back(std::move(nt));
  }
  return canonical(h);
}

RationalFn dilate(const RationalFn& f, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("dilate: lambda must be positive");
  RationalFn h(f.rows, f.cols);
  h.constant = f.constant;
  for (const auto& t : f.terms) {
    PoleTerm nt;
    nt.pole = lambda * t.pole;
    for (size_t j = 0; j < t.coef.size(); ++j)
      nt.coef.push_back(std::pow(lambda, double(j + 1)) * t.coef[j]);
    h.terms.push_back(std::move(nt));
  }
  return h;
}

RationalFn conjugate_real(const RationalFn& f) {
  RationalFn h(f.rows, f.cols);
  h.constant = f.constant.conjugate();
  for (const auto& t : f.terms) {
    PoleTerm nt;
    nt.pole = std::conj(t.pole);
    for (const auto& c : t.coef) nt.coef.push_back(c.conjugate());
    h.terms.push_back(std::move(nt));
  }
  return h;
}

RationalFn transpose(const RationalFn& f) {
  RationalFn h(f.cols, f.rows);
  h.constant = f.constant.transpose();
  for (const auto& t : f.terms) {
    PoleTerm nt;
    nt.pole = t.pole;
    for (const auto& c : t.coef) nt.coef.push_back(c.transpose());
    h.terms.push_back(std::move(nt));
  }
  return h;
}

Mat evaluate(const RationalFn& f, cplx z) {
  Mat v = f.constant;
  for (const auto& t : f.terms) {
    cplx d = z - t.pole;
    cplx pw = 1.0;
    for (size_t j = 0; j < t.coef.size(); ++j) {
      pw /= d;
      v += t.coef[j] * pw;
    }
  }
  return v;
}

RationalFn pi_plus(const RationalFn& f) {
  RationalFn h(f.rows, f.cols);
  for (const auto& t : f.terms)
    if (t.pole.imag() > 0.0) h.terms.push_back(t);
  return h;
}

RationalFn pi_minus(const RationalFn& f) {
  RationalFn h(f.rows, f.cols);
  for (const auto& t : f.terms)
    if (t.pole.imag() < 0.0) h.terms.push_back(t);
  return h;
}

Mat pi_prime(const RationalFn& f) {
  double s = f.scale();
  if (f.constant.cwiseAbs().maxCoeff() > 1e-8 * (1.0 + s))
    throw std::invalid_argument("pi_prime: nonzero constant term");
  Mat v = Mat::Zero(f.rows, f.cols);
  for (const auto& t : f.terms)
    if (t.pole.imag() > 0.0 && !t.coef.empty()) v += t.coef[0];
  return kI * v;
}

bool is_hardy_plus(const RationalFn& f, double tol) {
  double s = 1.0 + f.scale();
  if (f.constant.cwiseAbs().maxCoeff() > tol * s) return false;
  for (const auto& t : f.terms)
    if (t.pole.imag() < 0.0) {
      for (const auto& c : t.coef)
        if (c.cwiseAbs().maxCoeff() > tol * s) return false;
    }
  return true;
}

bool is_hardy_minus(const RationalFn& f, double tol) {
  double s = 1.0 + f.scale();
  if (f.constant.cwiseAbs().maxCoeff() > tol * s) return false;
  for (const auto& t : f.terms)
    if (t.pole.imag() > 0.0) {
      for (const auto& c : t.coef)
        if (c.cwiseAbs().maxCoeff() > tol * s) return false;
    }
  return true;
}

RationalFn laguerre_hat(int n) {
  // hat(phi_n)(xi) = -i sqrt(2) (xi+i)^n / (xi-i)^{n+1}
  RationalFn f(1, 1);
  PoleTerm t;
  t.pole = kI;
  t.coef.assign(n + 1, Mat::Zero(1, 1));
  const cplx base = -kI * std::sqrt(2.0);
  for (int j = 1; j <= n + 1; ++j) {
    cplx c = base * binomial(n, n + 1 - j) * std::pow(2.0 * kI, double(j - 1));
    t.coef[j - 1] = c * Mat::Ones(1, 1);
  }
  f.terms.push_back(std::move(t));
  return f;
}

RationalFn laguerre_bar(int m) { return conjugate_real(laguerre_hat(m)); }

namespace {

// Scalar determinant of a square RationalFn by cofactor expansion.
RationalFn pf_determinant(const RationalFn& a) {
  int n = a.rows;
  if (n == 1) return a;
  // Extract entry (i,j) as a scalar RationalFn.
  auto entry = [&](const RationalFn& f, int i, int j) {
    RationalFn e(1, 1);
    e.constant(0, 0) = f.constant(i, j);
    for (const auto& t : f.terms) {
      PoleTerm nt;
      nt.pole = t.pole;
      for (const auto& c : t.coef) {
        Mat m(1, 1);
        m(0, 0) = c(i, j);
        nt.coef.push_back(m);
      }
      e.terms.push_back(std::move(nt));
    }
    return canonical(e);
  };
  // Laplace expansion over the first row with explicit minors.
  std::vector<int> cols(n);
  std::iota(cols.begin(), cols.end(), 0);
  std::function<RationalFn(std::vector<int>, std::vector<int>)> det_minor =
      [&](std::vector<int> ri, std::vector<int> ci) -> RationalFn {
    if (ri.size() == 1) return entry(a, ri[0], ci[0]);
    RationalFn acc(1, 1);
    for (size_t k = 0; k < ci.size(); ++k) {
      std::vector<int> ri2(ri.begin() + 1, ri.end());
      std::vector<int> ci2;
      for (size_t l = 0; l < ci.size(); ++l)
        if (l != k) ci2.push_back(ci[l]);
      RationalFn term = mul(entry(a, ri[0], ci[k]), det_minor(ri2, ci2));
      if (k % 2 == 1) term = scale(term, cplx(-1.0, 0.0));
      acc = add(acc, term);
    }
    return acc;
  };
  std::vector<int> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return det_minor(rows, cols);
}

// Adjugate matrix (transpose of cofactors) in partial fractions.
RationalFn pf_adjugate(const RationalFn& a) {
  int n = a.rows;
  if (n == 1) return RationalFn::const_fn(Mat::Ones(1, 1));
  auto entry = [&](int i, int j) {
    RationalFn e(1, 1);
    e.constant(0, 0) = a.constant(i, j);
    for (const auto& t : a.terms) {
      PoleTerm nt;
      nt.pole = t.pole;
      for (const auto& c : t.coef) {
        Mat m(1, 1);
        m(0, 0) = c(i, j);
        nt.coef.push_back(m);
      }
      e.terms.push_back(std::move(nt));
    }
    return canonical(e);
  };
  std::function<RationalFn(const std::vector<int>&, const std::vector<int>&)>
      det_sub = [&](const std::vector<int>& ri, const std::vector<int>& ci) -> RationalFn {
    if (ri.size() == 0) return RationalFn::const_fn(Mat::Ones(1, 1));
    if (ri.size() == 1) return entry(ri[0], ci[0]);
    RationalFn acc(1, 1);
    for (size_t k = 0; k < ci.size(); ++k) {
      std::vector<int> ri2(ri.begin() + 1, ri.end());
      std::vector<int> ci2;
      for (size_t l = 0; l < ci.size(); ++l)
        if (l != k) ci2.push_back(ci[l]);
      RationalFn term = mul(entry(ri[0], ci[k]), det_sub(ri2, ci2));
      if (k % 2 == 1) term = scale(term, cplx(-1.0, 0.0));
      acc = add(acc, term);
    }
    return acc;
  };
  // adj(a)_{ij} = (-1)^{i+j} minor_{ji}
  RationalFn out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::vector<int> ri, ci;
      for (int r = 0; r < n; ++r)
        if (r != j) ri.push_back(r);
      for (int c = 0; c < n; ++c)
        if (c != i) ci.push_back(c);
      RationalFn m = det_sub(ri, ci);
      if ((i + j) % 2 == 1) m = scale(m, cplx(-1.0, 0.0));
      // scatter scalar into (i,j)
      RationalFn sc(n, n);
      sc.constant(i, j) = m.constant(0, 0);
      for (const auto& t : m.terms) {
        PoleTerm nt;
        nt.pole = t.pole;
        for (const auto& c : t.coef) {
          Mat mm = Mat::Zero(n, n);
          mm(i, j) = c(0, 0);
          nt.coef.push_back(mm);
        }
        sc.terms.push_back(std::move(nt));
      }
      out = add(out, sc);
    }
  }
  return out;
}

// Roots of the polynomial p(z) = sum c_k z^k via the companion matrix.
std::vector<cplx> poly_roots(std::vector<cplx> c) {
  while (!c.empty() && std::abs(c.back()) < 1e-13) c.pop_back();
  int deg = int(c.size()) - 1;
  std::vector<cplx> roots;
  if (deg < 1) return roots;
  Mat comp = Mat::Zero(deg, deg);
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[i] / c[deg];
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  Eigen::ComplexEigenSolver<Mat> es(comp, false);
  for (int i = 0; i < deg; ++i) roots.push_back(es.eigenvalues()(i));
  return roots;
}

}  // namespace

RationalFn broadcast_scalar(const RationalFn& s, int n) {
  if (s.rows != 1 || s.cols != 1)
    throw std::invalid_argument("broadcast_scalar: input must be 1x1");
  RationalFn h(n, n);
  h.constant = s.constant(0, 0) * Mat::Identity(n, n);
  for (const auto& t : s.terms) {
    PoleTerm nt;
    nt.pole = t.pole;
    for (const auto& c : t.coef) nt.coef.push_back(c(0, 0) * Mat::Identity(n, n));
    h.terms.push_back(std::move(nt));
  }
  return h;
}

RationalFn rational_inverse(const RationalFn& a, const std::string& where) {
  if (a.rows != a.cols) throw std::invalid_argument("rational_inverse: not square");
  RationalFn det = canonical(pf_determinant(a));
  cplx det_inf = det.constant(0, 0);
  double ds = det.scale();
  if (std::abs(det_inf) < 1e-10 * (1.0 + ds))
    throw NotInvertibleError("determinant vanishes at infinity", where);

  RationalFn ddet = derivative(det);

  // P(z) = det(z) * prod (z - p_k)^{m_k} is a polynomial; its roots are the
  // zeros of the determinant with multiplicity.
  int degq = 0;
  double rad = 1.0;
  for (const auto& t : det.terms) {
    degq += int(t.coef.size());
    rad = std::max(rad, std::abs(t.pole));
  }
  std::vector<cplx> zeros;
  if (degq > 0) {
    double R = 2.0 * rad + 2.0;
    int K = 2 * (degq + 1);
    std::vector<cplx> samples(K);
    for (int m = 0; m < K; ++m) {
      cplx z = R * std::exp(kI * (2.0 * kPi * m / K));
      cplx q = 1.0;
      for (const auto& t : det.terms) q *= std::pow(z - t.pole, double(t.coef.size()));
      samples[m] = evaluate(det, z)(0, 0) * q;
    }
    std::vector<cplx> coef(degq + 1, 0.0);
    for (int j = 0; j <= degq; ++j) {
      cplx s = 0.0;
      for (int m = 0; m < K; ++m)
        s += samples[m] * std::exp(-kI * (2.0 * kPi * m * j / K));
      coef[j] = s / double(K) / std::pow(R, double(j));
    }
    zeros = poly_roots(coef);

    // The sampled reconstruction loses relative accuracy like R^deg, so
    // polish each root against the exactly evaluable determinant.  Simple
    // roots converge quadratically; clustered ones still land close enough
    // for the merge below.
    for (auto& z : zeros) {
      cplx zc = z;
      for (int it = 0; it < 12; ++it) {
        cplx f = evaluate(det, zc)(0, 0);
        cplx fp = evaluate(ddet, zc)(0, 0);
        if (std::abs(fp) < 1e-14 * (1.0 + ds)) break;
        cplx step = f / fp;
        zc -= step;
        if (std::abs(zc - z) > 1.0 + std::abs(z)) {
          zc = z;  // diverged; keep the unpolished root
          break;
        }
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(zc))) break;
      }
      z = zc;
    }
  }

  // Cluster the zeros; multiple zeros are legitimate and become higher-order
  // poles of 1/det.
  std::vector<std::pair<cplx, int>> clusters;
  for (const auto& z : zeros) {
    bool found = false;
    for (auto& cl : clusters) {
      if (std::abs(z - cl.first) < 1e-4 * (1.0 + std::abs(z))) {
        cl.first = (cl.first * double(cl.second) + z) / double(cl.second + 1);
        cl.second += 1;
        found = true;
        break;
      }
    }
    if (!found) clusters.emplace_back(z, 1);
  }

  // An order m zero is only a simple zero of the (m-1)-st derivative, so
  // the center of a multiplicity-m cluster can be polished quadratically
  // there.  The guard radius rejects runs that leave the cluster's basin.
  auto polish_center = [&](cplx guess, int m, double guard) {
    RationalFn dk = det;
    for (int i = 0; i + 1 < m; ++i) dk = derivative(dk);
    RationalFn dk1 = derivative(dk);
    cplx zc = guess;
    for (int it = 0; it < 16; ++it) {
      cplx f = evaluate(dk, zc)(0, 0);
      cplx fp = evaluate(dk1, zc)(0, 0);
      if (std::abs(fp) < 1e-300) return guess;
      cplx step = f / fp;
      zc -= step;
      if (std::abs(zc - guess) > guard) return guess;
      if (std::abs(step) < 1e-15 * (1.0 + std::abs(zc))) break;
    }
    return zc;
  };
  for (auto& cl : clusters)
    if (cl.second >= 2)
      cl.first = polish_center(cl.first, cl.second,
                               1e-2 * (1.0 + std::abs(cl.first)));

  // Count the determinant zeros inside |z - z0| = rho by the argument
  // principle.  The raw contour integral gives zeros minus poles, and every
  // pole of det is listed in its terms, so the pole count is added back.
  // A non-integral value means a singularity sits on the contour; the radius
  // is nudged outward and the count retried.
  auto count_zeros = [&](cplx z0, double& rho) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      const int K = 512;
      cplx s = 0.0;
      for (int k = 0; k < K; ++k) {
        cplx w = rho * std::exp(kI * (2.0 * kPi * k / K));
        cplx z = z0 + w;
        s += evaluate(ddet, z)(0, 0) / evaluate(det, z)(0, 0) * w;
      }
      double zmp = (s / double(K)).real();
      for (const auto& t : det.terms)
        if (std::abs(t.pole - z0) < rho) zmp += double(t.coef.size());
      double r = std::round(zmp);
      if (std::abs(zmp - r) < 0.1 && r >= 0.0) return int(r);
      rho *= 1.37;
    }
    return -1;
  };

  // The companion roots of the noisy reconstruction scatter around a
  // multiplicity-m zero like noise^(1/m), which can exceed the merge
  // tolerance, so the grouping above is only a guess.  Validate each cluster
  // by counting the zeros it actually encloses, and when the count differs
  // from the number of root markers, grow the contour until the enclosed
  // markers account for every enclosed zero, merge them, and re-polish.
  bool settled = false;
  for (int pass = 0; pass < 64 && !settled; ++pass) {
    settled = true;
    for (size_t ci = 0; ci < clusters.size(); ++ci) {
      cplx z0 = clusters[ci].first;
      int m = clusters[ci].second;
      double other = 1e30;
      for (size_t cj = 0; cj < clusters.size(); ++cj)
        if (cj != ci) other = std::min(other, std::abs(z0 - clusters[cj].first));
      double rho = std::min(0.5 * other, 0.3 * (1.0 + std::abs(z0)));
      int w = count_zeros(z0, rho);
      if (w == m) continue;
      settled = false;
      int menc = 0;
      for (int grow = 0;; ++grow) {
        if (grow > 0) {
          rho *= 1.5;
          w = count_zeros(z0, rho);
        }
        menc = 0;
        for (const auto& cl : clusters)
          if (std::abs(cl.first - z0) <= rho) menc += cl.second;
        if (w >= 1 && w == menc) break;
        if (grow >= 48 || rho > 8.0 * (1.0 + std::abs(z0)))
          throw NotInvertibleError(
              "determinant zero clusters could not be resolved", where);
      }
      cplx zc = 0.0;
      std::vector<std::pair<cplx, int>> keep;
      for (const auto& cl : clusters) {
        if (std::abs(cl.first - z0) <= rho) zc += cl.first * double(cl.second);
        else keep.push_back(cl);
      }
      zc /= double(w);
      zc = polish_center(zc, w,
                         std::max(4.0 * rho, 1e-2 * (1.0 + std::abs(zc))));
      keep.emplace_back(zc, w);
      clusters.swap(keep);
      break;
    }
  }
  if (!settled)
    throw NotInvertibleError("determinant zero clusters could not be resolved",
                             where);

  for (const auto& cl : clusters)
    if (std::abs(cl.first.imag()) < kPoleImagMin)
      throw NotInvertibleError("determinant zero on the real axis near Re = " +
                                   std::to_string(cl.first.real()),
                               where);

  // Laurent coefficients of 1/det at each cluster by contour quadrature.
  RationalFn invdet(1, 1);
  invdet.constant(0, 0) = 1.0 / det_inf;
  for (size_t ci = 0; ci < clusters.size(); ++ci) {
    cplx z0 = clusters[ci].first;
    int m = clusters[ci].second;
    double sep = std::abs(z0.imag());
    for (size_t cj = 0; cj < clusters.size(); ++cj)
      if (cj != ci) sep = std::min(sep, std::abs(z0 - clusters[cj].first));
    for (const auto& t : det.terms) sep = std::min(sep, std::abs(z0 - t.pole));
    double rho = 0.3 * sep;
    if (!(rho > 0.0))
      throw NotInvertibleError("determinant zero collides with pole data", where);
    int K = 256;
    PoleTerm pt;
    pt.pole = z0;
    pt.coef.assign(m, Mat::Zero(1, 1));
    for (int j = 1; j <= m; ++j) {
      cplx s = 0.0;
      for (int k = 0; k < K; ++k) {
        cplx w = rho * std::exp(kI * (2.0 * kPi * k / K));
        cplx z = z0 + w;
        s += std::pow(w, double(j)) / evaluate(det, z)(0, 0);
      }
      pt.coef[j - 1] = (s / double(K)) * Mat::Ones(1, 1);
    }
    invdet.terms.push_back(std::move(pt));
  }
  invdet = canonical(invdet);

  RationalFn inv = canonical(mul(pf_adjugate(a), broadcast_scalar(invdet, a.rows)));

  // Certificate: residual of a * inv - 1 at sample points on the real axis.
  double resid = 0.0;
  for (double x : {-2.7, -1.3, -0.41, 0.0, 0.37, 1.1, 2.9}) {
    Mat r = evaluate(a, x) * evaluate(inv, x) - Mat::Identity(a.rows, a.rows);
    resid = std::max(resid, r.cwiseAbs().maxCoeff());
  }
  if (resid > 1e-7 * (1.0 + a.scale()))
    throw NotInvertibleError("inverse certificate failed, residual = " +
                                 std::to_string(resid),
                             where);
  return inv;
}

}  // namespace gbvp
