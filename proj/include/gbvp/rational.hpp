#pragma once
// Matrix-valued rational functions of one real frequency variable, stored in
// partial-fraction form: constant term plus poles off the real axis with
// order-indexed matrix coefficients.  All half-line calculus (the plus/minus
// projections and the regularizing functional) is exact residue arithmetic.

#include <gbvp/common.hpp>

namespace gbvp {

struct PoleTerm {
  cplx pole;
  // coef[j] multiplies (xi - pole)^{-(j+1)}; coef.size() is the pole order.
  std::vector<Mat> coef;
};

struct RationalFn {
  int rows = 1, cols = 1;
  Mat constant;  // value at infinity
  std::vector<PoleTerm> terms;

  RationalFn() : constant(Mat::Zero(1, 1)) {}
  RationalFn(int r, int c) : rows(r), cols(c), constant(Mat::Zero(r, c)) {}

  static RationalFn const_fn(const Mat& m);
  static RationalFn zero_fn(int r, int c);
  // r / (xi - p)^order
  static RationalFn pole_fn(cplx p, const Mat& r, int order = 1);

  bool is_zero(double tol = 1e-14) const;
  double scale() const;  // max coefficient magnitude, for relative tolerances
};

// Throws std::invalid_argument if |Im p| < kPoleImagMin.
void check_pole(cplx p);

// Merge duplicate poles, drop negligible coefficients, sort poles.
RationalFn canonical(const RationalFn& f);

RationalFn add(const RationalFn& f, const RationalFn& g);
RationalFn sub(const RationalFn& f, const RationalFn& g);
RationalFn scale(const RationalFn& f, cplx s);
RationalFn matmul(const Mat& m, const RationalFn& f);
RationalFn matmul(const RationalFn& f, const Mat& m);
// Pointwise matrix product, re-expanded into partial fractions.
RationalFn mul(const RationalFn& f, const RationalFn& g);
// Scalar (1x1) rational function broadcast onto the n-dim identity.
RationalFn broadcast_scalar(const RationalFn& s, int n);

RationalFn derivative(const RationalFn& f);
// Euler-type generator -xi d/dxi f, itself rational decaying at infinity.
RationalFn ederiv(const RationalFn& f);
// f(xi/lambda): poles scale by lambda, order-m coefficients by lambda^m.
RationalFn dilate(const RationalFn& f, double lambda);
// Complex conjugate on the real axis: poles reflect across the axis.
RationalFn conjugate_real(const RationalFn& f);
RationalFn transpose(const RationalFn& f);

Mat evaluate(const RationalFn& f, cplx z);

// Keep upper-half-plane pole terms (image of the positive half line).
RationalFn pi_plus(const RationalFn& f);
// Keep lower-half-plane pole terms.
RationalFn pi_minus(const RationalFn& f);
// The regularizing functional: i * (sum of order-one coefficients at upper
// poles).  Agrees with (2*pi)^{-1} integral over the real axis whenever the
// integrand is absolutely integrable.  Throws on a nonnegligible constant.
Mat pi_prime(const RationalFn& f);

bool is_hardy_plus(const RationalFn& f, double tol = 1e-10);
bool is_hardy_minus(const RationalFn& f, double tol = 1e-10);

// Fourier images of the orthonormal Laguerre basis on the half line and
// their conjugates; single simple-pole data at +/- i.
RationalFn laguerre_hat(int n);   // pole at +i, order n+1
RationalFn laguerre_bar(int m);   // pole at -i, order m+1

// Pointwise inverse of a square matrix rational function, computed through
// the adjugate and a root search for the determinant zeros.  Throws
// NotInvertibleError when the determinant vanishes on or too close to the
// real axis, or at infinity.
RationalFn rational_inverse(const RationalFn& a, const std::string& where = "rational_inverse");

}  // namespace gbvp
