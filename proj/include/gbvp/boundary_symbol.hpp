#pragma once

#include <utility>
#include <vector>

#include "gbvp/rational.hpp"

namespace gbvp {

// One separable smoothing term g(xi, eta) = u(xi) v(eta).
// u is dim x k with only upper-half-plane poles and no constant part,
// v is k x dim with only lower-half-plane poles and no constant part.
struct GreenTerm {
  RationalFn u;
  RationalFn v;
};

// Operator-valued symbol on the half line, acting on H+^dim (+) C^dim:
//   (u, v) |-> ( P+(a u) + sum_t u_t Tr'[v_t u] + c v,  Tr'[b u] + q v )
// where P+ keeps upper-pole terms and Tr' is the regularized functional.
// a is dim x dim with trivial partial winding (no constraint stored here),
// c is dim x dim upper (column operator C^dim -> H+^dim),
// b is dim x dim lower (row operator H+^dim -> C^dim),
// q is a constant dim x dim block on the extra summand.
struct BoundarySymbol {
  int dim = 1;
  RationalFn a;
  std::vector<GreenTerm> green;
  RationalFn c;
  RationalFn b;
  Mat q;

  BoundarySymbol() : a(1, 1), c(1, 1), b(1, 1), q(Mat::Zero(1, 1)) {}
  explicit BoundarySymbol(int n)
      : dim(n), a(n, n), c(n, n), b(n, n), q(Mat::Zero(n, n)) {}

  static BoundarySymbol identity(int n);
};

// Throws std::invalid_argument if shapes or Hardy conditions are violated.
void check_boundary_symbol(const BoundarySymbol& s, double tol = 1e-9);

BoundarySymbol bs_add(const BoundarySymbol& s1, const BoundarySymbol& s2);
BoundarySymbol bs_scale(const BoundarySymbol& s, cplx z);

// Operator composition s1 after s2.  All blocks stay in partial-fraction
// form; the Toeplitz leftover of a1 a2 is re-expanded into separable terms.
BoundarySymbol compose_boundary(const BoundarySymbol& s1, const BoundarySymbol& s2);

// Apply to an element (u, v) of H+^dim (+) C^dim.  u must be dim x 1.
std::pair<RationalFn, Vec> apply_boundary(const BoundarySymbol& s,
                                          const RationalFn& u, const Vec& v);

// Conjugation by the unitary L^2(R+) dilation, lambda > 0:
//   a(xi) -> a(xi/lambda), kernels pick up the density factor 1/lambda
// split evenly over the two legs, q unchanged.
BoundarySymbol twisted_rescale(const BoundarySymbol& s, double lambda);

// Derivative of the rescale family at lambda = 1:
//   d/dlambda twisted_rescale(s, lambda) = (1/lambda) twisted_rescale(rescale_generator(s), lambda).
// The rational part picks up -xi d/dxi, the kernel legs an extra -1/2.
BoundarySymbol rescale_generator(const BoundarySymbol& s);

// Regularized matrix trace: Tr'_xi[sum_t u_t(xi) v_t(xi)] + q.
Mat reg_trace(const BoundarySymbol& s);
cplx reg_trace_scalar(const BoundarySymbol& s);

// tr'(s1 s2 - s2 s1); finite because the commutator is smoothing.
cplx trace_commutator(const BoundarySymbol& s1, const BoundarySymbol& s2);

// Max deviation between two symbols, probed at real sample points
// (a, c, b on the line, kernels on a sample grid, q directly).
double boundary_distance(const BoundarySymbol& s1, const BoundarySymbol& s2);

// Galerkin matrix in the Laguerre basis: nb half-line modes per channel
// plus the extra C^dim summand, total dim*(nb+1) square.  Row/column
// layout: Laguerre mode n, channel i at n*dim + i, summand after.
// The Toeplitz block is filled from Fourier coefficients of a on the
// Cayley circle; the smoothing, trace and summand blocks from residues.
Mat laguerre_matrix(const BoundarySymbol& s, int nb);

// Same matrix assembled by adaptive-free numerical quadrature on the real
// line, evaluating every factor pointwise.  Slow but free of partial
// fraction re-expansion; kept as an independent cross-check.
Mat laguerre_matrix_quadrature(const BoundarySymbol& s, int nb);

// Inverse in the same class.  The rational part is inverted exactly and
// the remaining finite-rank perturbation by a block linear solve.  Both
// one-sided certificates are checked; failure throws NotInvertibleError.
BoundarySymbol invert_boundary(const BoundarySymbol& s,
                               const std::string& where = "invert_boundary");

}  // namespace gbvp
