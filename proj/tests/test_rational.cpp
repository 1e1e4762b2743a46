#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <gbvp/rational.hpp>

#include <random>

using namespace gbvp;

namespace {

// Oracle: (2 pi)^{-1} closed contour integral, one small circle around each
// upper pole.  Equals pi_prime for any decaying rational function and is
// independent of the residue arithmetic.  Trapezoid sums on circles whose
// clearance from all other singularities is guaranteed by construction.
Mat contour_pi_prime(const RationalFn& f) {
  Mat acc = Mat::Zero(f.rows, f.cols);
  for (const auto& t : f.terms) {
    if (t.pole.imag() <= 0.0) continue;
    double rho = 0.45 * t.pole.imag();
    for (const auto& s : f.terms) {
      if (&s == &t) continue;
      rho = std::min(rho, 0.45 * std::abs(s.pole - t.pole));
    }
    const int N = 512;
    Mat circ = Mat::Zero(f.rows, f.cols);
    for (int k = 0; k < N; ++k) {
      cplx w = rho * std::exp(kI * (2.0 * kPi * k / N));
      circ += evaluate(f, t.pole + w) * (kI * w);
    }
    // (1/2pi) * closed integral; the trapezoid step 2pi/N cancels the 1/2pi.
    acc += circ / double(N);
  }
  return acc;
}

// Oracle valid only for absolutely integrable functions: real-line
// quadrature after the tangent substitution.
Mat quad_real_line(const RationalFn& f) {
  std::vector<double> gx, gw;
  gauss_legendre(200, gx, gw);
  Mat acc = Mat::Zero(f.rows, f.cols);
  for (size_t i = 0; i < gx.size(); ++i) {
    double t = 0.5 * kPi * gx[i];
    double sec2 = 1.0 / (std::cos(t) * std::cos(t));
    acc += (0.5 * kPi * gw[i]) * sec2 * evaluate(f, std::tan(t));
  }
  return acc / (2.0 * kPi);
}

RationalFn random_rational(std::mt19937& rng, int dim, int npoles,
                           bool decaying = false) {
  std::uniform_real_distribution<double> re(-2.0, 2.0), im(0.1, 2.0), pm(0.0, 1.0);
  RationalFn f(dim, dim);
  if (!decaying) {
    Mat c = Mat::Random(dim, dim);
    f.constant = c;
  }
  for (int k = 0; k < npoles; ++k) {
    double s = pm(rng) < 0.5 ? 1.0 : -1.0;
    cplx p(re(rng), s * im(rng));
    int order = pm(rng) < 0.7 ? 1 : 2;
    RationalFn t = RationalFn::pole_fn(p, Mat::Random(dim, dim), order);
    f = add(f, t);
  }
  return f;
}

}  // namespace

TEST_CASE("pole guard rejects near-real poles") {
  CHECK_THROWS_AS(RationalFn::pole_fn(cplx(0.3, 1e-9), Mat::Ones(1, 1)),
                  std::invalid_argument);
  CHECK_NOTHROW(RationalFn::pole_fn(cplx(0.3, 1e-7), Mat::Ones(1, 1)));
}

TEST_CASE("pinned values of the regularizing functional") {
  // 1/(1+i xi) = -i/(xi - i): pole at +i, coefficient -i.
  RationalFn f = RationalFn::pole_fn(kI, -kI * Mat::Ones(1, 1));
  Mat v = pi_prime(f);
  CHECK(std::abs(v(0, 0) - cplx(1.0, 0.0)) < 1e-14);

  // 1/(1+xi^2): upper residue 1/(2i) -> functional value 1/2.
  RationalFn g = add(RationalFn::pole_fn(kI, Mat::Ones(1, 1) / (2.0 * kI)),
                     RationalFn::pole_fn(-kI, -Mat::Ones(1, 1) / (2.0 * kI)));
  for (double x : {-1.7, 0.0, 0.9})
    CHECK(std::abs(evaluate(g, x)(0, 0) - 1.0 / (1.0 + x * x)) < 1e-13);
  CHECK(std::abs(pi_prime(g)(0, 0) - 0.5) < 1e-14);
  CHECK(std::abs(quad_real_line(g)(0, 0) - 0.5) < 1e-10);

  // plus-projection of 1/(1+xi^2) is (1/2i)/(xi-i).
  RationalFn gp = pi_plus(g);
  for (double x : {-0.8, 0.3, 2.0}) {
    cplx want = (1.0 / (2.0 * kI)) / (cplx(x) - kI);
    CHECK(std::abs(evaluate(gp, x)(0, 0) - want) < 1e-13);
  }
}

TEST_CASE("pi_prime rejects a nonzero constant term") {
  RationalFn f = RationalFn::const_fn(Mat::Ones(1, 1));
  CHECK_THROWS_AS(pi_prime(f), std::invalid_argument);
}

TEST_CASE("projections split and annihilate as expected") {
  std::mt19937 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    RationalFn f = random_rational(rng, 2, 3, true);
    RationalFn s = add(pi_plus(f), pi_minus(f));
    for (double x : {-1.1, 0.2, 1.9}) {
      Mat d = evaluate(s, x) - evaluate(f, x);
      CHECK(d.cwiseAbs().maxCoeff() < 1e-11);
    }
    // products of same-side elements have no opposite-side residue
    RationalFn pp = mul(pi_plus(f), pi_plus(f));
    CHECK(pi_prime(pp).cwiseAbs().maxCoeff() < 1e-10);
    RationalFn mm = mul(pi_minus(f), pi_minus(f));
    CHECK(pi_prime(mm).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("product re-expansion matches pointwise evaluation") {
  std::mt19937 rng(11);
  for (int rep = 0; rep < 40; ++rep) {
    RationalFn f = random_rational(rng, 2, 3);
    RationalFn g = random_rational(rng, 2, 2);
    RationalFn h = mul(f, g);
    for (cplx z : {cplx(0.4, 0.02), cplx(-1.2, -0.07), cplx(2.2, 0.01)}) {
      Mat d = evaluate(h, z) - evaluate(f, z) * evaluate(g, z);
      CHECK(d.cwiseAbs().maxCoeff() < 1e-9 * (1.0 + f.scale() * g.scale()));
    }
  }
}

TEST_CASE("product with a shared pole raises the order") {
  Mat one = Mat::Ones(1, 1);
  RationalFn f = RationalFn::pole_fn(kI, one);
  RationalFn h = mul(f, f);
  REQUIRE(h.terms.size() == 1);
  CHECK(h.terms[0].coef.size() == 2);
  for (cplx z : {cplx(0.5, 0.0), cplx(-1.0, 0.5)}) {
    cplx want = 1.0 / ((z - kI) * (z - kI));
    CHECK(std::abs(evaluate(h, z)(0, 0) - want) < 1e-13);
  }
}

TEST_CASE("derivative, euler generator, dilation, conjugation") {
  std::mt19937 rng(13);
  RationalFn f = random_rational(rng, 2, 3);
  RationalFn df = derivative(f);
  RationalFn ef = ederiv(f);
  RationalFn f2 = dilate(f, 2.0);
  RationalFn fc = conjugate_real(f);
  for (cplx z : {cplx(0.7, 0.05), cplx(-1.4, 0.03)}) {
    double h = 1e-5;
    Mat num = (evaluate(f, z + h) - evaluate(f, z - h)) / (2.0 * h);
    CHECK((evaluate(df, z) - num).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((evaluate(ef, z) + z * evaluate(df, z)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((evaluate(f2, z) - evaluate(f, z / 2.0)).cwiseAbs().maxCoeff() < 1e-12);
  }
  for (double x : {-0.9, 0.45}) {
    Mat d = evaluate(fc, x) - evaluate(f, x).conjugate();
    CHECK(d.cwiseAbs().maxCoeff() < 1e-12);
  }
  // dilation scales the regularizing functional by the dilation factor
  RationalFn g = random_rational(rng, 1, 3, true);
  Mat d = pi_prime(dilate(g, 3.7)) - 3.7 * pi_prime(g);
  CHECK(d.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("contour oracle confirms the residue functional") {
  std::mt19937 rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    RationalFn f = random_rational(rng, 2, 4, true);
    Mat a = pi_prime(f);
    Mat b = contour_pi_prime(f);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9 * (1.0 + f.scale()));
  }
}

TEST_CASE("laguerre transforms are orthonormal under the functional") {
  for (int n = 0; n < 8; ++n) {
    for (int m = 0; m < 8; ++m) {
      RationalFn prod = mul(laguerre_hat(n), laguerre_bar(m));
      cplx ip = pi_prime(prod)(0, 0);
      double want = (n == m) ? 1.0 : 0.0;
      CHECK(std::abs(ip - want) < 1e-9);
    }
  }
}

TEST_CASE("evaluation functional via the pole kernel") {
  // For u in the image of the half line, u(q) = i pi_prime[u/(xi-q)], Im q<0.
  RationalFn u = add(laguerre_hat(2), scale(laguerre_hat(0), cplx(0.3, 0.1)));
  cplx q(0.4, -0.8);
  RationalFn ker = RationalFn::pole_fn(q, Mat::Ones(1, 1));
  cplx got = (kI * pi_prime(mul(u, ker)))(0, 0);
  cplx want = evaluate(u, q)(0, 0);
  CHECK(std::abs(got - want) < 1e-12);
}

TEST_CASE("rational inverse with simple and multiple determinant zeros") {
  // 2x2 with an off-diagonal coupling; det has distinct zeros.
  Mat id = Mat::Identity(2, 2);
  RationalFn a = RationalFn::const_fn(id);
  Mat c01 = Mat::Zero(2, 2);
  c01(0, 1) = 0.7;
  a = add(a, RationalFn::pole_fn(cplx(0.2, 1.1), c01));
  Mat c10 = Mat::Zero(2, 2);
  c10(1, 0) = -0.4;
  a = add(a, RationalFn::pole_fn(cplx(-0.5, -0.9), c10));
  Mat c00 = Mat::Zero(2, 2);
  c00(0, 0) = 0.5;
  a = add(a, RationalFn::pole_fn(cplx(0.0, 1.4), c00));
  RationalFn inv = rational_inverse(a);
  for (double x : {-2.1, -0.3, 0.8, 3.3}) {
    Mat r = evaluate(a, x) * evaluate(inv, x) - id;
    CHECK(r.cwiseAbs().maxCoeff() < 1e-9);
    Mat l = evaluate(inv, x) * evaluate(a, x) - id;
    CHECK(l.cwiseAbs().maxCoeff() < 1e-9);
  }

  // diag of two equal factors: determinant zero of multiplicity two.
  RationalFn cay(2, 2);
  cay.constant = id;
  Mat cc = -2.0 * kI * id;
  cay = add(cay, RationalFn::pole_fn(-kI, cc));  // (xi-i)/(xi+i) on the diagonal
  RationalFn cinv = rational_inverse(cay);
  for (double x : {-1.7, 0.0, 2.4}) {
    Mat r = evaluate(cay, x) * evaluate(cinv, x) - id;
    CHECK(r.cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("rational inverse failures carry a location") {
  // symbol with a real zero: (xi - 1)/(xi + i) vanishes at xi = 1
  RationalFn a(1, 1);
  a.constant(0, 0) = 1.0;
  a = add(a, RationalFn::pole_fn(-kI, (-1.0 - kI) * Mat::Ones(1, 1)));
  CHECK(std::abs(evaluate(a, 1.0)(0, 0)) < 1e-12);
  CHECK_THROWS_AS(rational_inverse(a, "unit-test"), NotInvertibleError);

  // zero value at infinity
  RationalFn b = RationalFn::pole_fn(kI, Mat::Ones(1, 1));
  CHECK_THROWS_AS(rational_inverse(b, "unit-test"), NotInvertibleError);
}
