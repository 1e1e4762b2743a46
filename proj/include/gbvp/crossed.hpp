#pragma once
// Smooth crossed product of a coefficient algebra by a finite group: maps
// from the group into the algebra with the twisted convolution product,
// invertibility through the left regular representation, and decay
// bookkeeping for the infinite-group stress path.

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "gbvp/common.hpp"

namespace gbvp {

// Finite group by explicit multiplication table.  Element 0 is the identity.
struct FiniteGroup {
  int n = 1;
  std::vector<std::string> names{"e"};
  std::vector<std::vector<int>> mult{{0}};
  std::vector<int> inverse{0};
  std::vector<int> word_len{0};

  static FiniteGroup trivial() { return FiniteGroup{}; }

  // Z_k with generator g: names e, g, g^2, ...; word length is the shortest
  // power expression in g and g^{-1}.
  static FiniteGroup cyclic(int k);
};

// Throws std::invalid_argument if the table is not a group (associativity,
// identity, inverses) or the metadata shapes disagree.
void check_group(const FiniteGroup& g);

// Partition of the element set into conjugacy classes; class of the
// identity comes first, members otherwise in index order.
std::vector<std::vector<int>> conjugacy_classes(const FiniteGroup& g);

// Elements commuting with gamma.
std::vector<int> centralizer(const FiniteGroup& g, int gamma);

// For each member gp of the class of gamma, some z with gp = z gamma z^{-1}.
// Order matches conjugacy class member order.
std::vector<int> conjugators(const FiniteGroup& g, int gamma,
                             const std::vector<int>& cls);

// Coefficient algebra plugged into the crossed product: product, sum, the
// group action by automorphisms, identity and zero, a sup-seminorm, and a
// blockwise inverse.  block_invert receives the n x n block matrix of the
// left regular representation (row major) and must return the identity
// column of its inverse, throwing NotInvertibleError when singular.
template <class A>
struct CoefficientAlgebra {
  std::function<A(const A&, const A&)> mul;
  std::function<A(const A&, const A&)> add;
  std::function<A(int, const A&)> act;
  std::function<A()> zero;
  std::function<A()> one;
  std::function<double(const A&)> norm;
  std::function<std::vector<A>(const std::vector<A>&, int)> block_invert;
};

// Crossed product element: one coefficient per group element (dense; the
// support is wherever the norm is nonzero).
template <class A>
struct CrossedElement {
  std::vector<A> c;

  static CrossedElement delta(const FiniteGroup& g,
                              const CoefficientAlgebra<A>& ops, int gamma,
                              const A& a) {
    CrossedElement f;
    f.c.assign(g.n, ops.zero());
    f.c[gamma] = a;
    return f;
  }
  static CrossedElement identity(const FiniteGroup& g,
                                 const CoefficientAlgebra<A>& ops) {
    return delta(g, ops, 0, ops.one());
  }
};

// Twisted convolution: (f1 f2)(gamma) = sum over gamma1 gamma2 = gamma of
// f1(gamma1) . gamma1(f2(gamma2)).
template <class A>
CrossedElement<A> cp_multiply(const FiniteGroup& g,
                              const CoefficientAlgebra<A>& ops,
                              const CrossedElement<A>& f1,
                              const CrossedElement<A>& f2) {
  if (int(f1.c.size()) != g.n || int(f2.c.size()) != g.n)
    throw std::invalid_argument("cp_multiply: element size vs group order");
  CrossedElement<A> out;
  out.c.assign(g.n, ops.zero());
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      int k = g.mult[i][j];
      out.c[k] = ops.add(out.c[k], ops.mul(f1.c[i], ops.act(i, f2.c[j])));
    }
  return out;
}

// Inverse through the left regular representation M[a,b] = a^{-1}(f(a b^{-1})),
// which turns the convolution into a block matrix product.  The coefficient
// algebra inverts the block matrix; block a of the identity column holds
// a^{-1}(g(a)), so applying the action recovers the inverse element.
template <class A>
CrossedElement<A> cp_invert(const FiniteGroup& g,
                            const CoefficientAlgebra<A>& ops,
                            const CrossedElement<A>& f) {
  if (int(f.c.size()) != g.n)
    throw std::invalid_argument("cp_invert: element size vs group order");
  std::vector<A> blocks;
  blocks.reserve(size_t(g.n) * g.n);
  for (int a = 0; a < g.n; ++a) {
    int ai = g.inverse[a];
    for (int b = 0; b < g.n; ++b)
      blocks.push_back(ops.act(ai, f.c[g.mult[a][g.inverse[b]]]));
  }
  std::vector<A> col = ops.block_invert(blocks, g.n);
  CrossedElement<A> out;
  out.c.assign(g.n, ops.zero());
  for (int a = 0; a < g.n; ++a) out.c[a] = ops.act(a, col[a]);
  return out;
}

// Crossed product sup-seminorm: max coefficient norm.
template <class A>
double cp_norm(const CoefficientAlgebra<A>& ops, const CrossedElement<A>& f) {
  double m = 0.0;
  for (const auto& a : f.c) m = std::max(m, ops.norm(a));
  return m;
}

// Smallest C with norms[i] <= C (1 + word_len[i])^{-N}: the rapid decay
// certificate for a declared N.  Finite groups make this vacuous; the
// stress path feeds truncated integer-group data through it.
double decay_constant(const std::vector<double>& norms,
                      const std::vector<int>& word_len, int order);

}  // namespace gbvp
