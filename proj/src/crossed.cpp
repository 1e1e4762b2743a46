#include "gbvp/crossed.hpp"

#include <stdexcept>

namespace gbvp {

FiniteGroup FiniteGroup::cyclic(int k) {
  if (k < 1) throw std::invalid_argument("cyclic: order must be positive");
  FiniteGroup g;
  g.n = k;
  g.names.clear();
  g.mult.assign(k, std::vector<int>(k, 0));
  g.inverse.assign(k, 0);
  g.word_len.assign(k, 0);
  for (int i = 0; i < k; ++i) {
    g.names.push_back(i == 0 ? "e" : (i == 1 ? "g" : "g" + std::to_string(i)));
    g.inverse[i] = (k - i) % k;
    g.word_len[i] = std::min(i, k - i);
    for (int j = 0; j < k; ++j) g.mult[i][j] = (i + j) % k;
  }
  return g;
}

void check_group(const FiniteGroup& g) {
  auto bad = [](const std::string& what) {
    throw std::invalid_argument("group table: " + what);
  };
  const int n = g.n;
  if (n < 1 || int(g.mult.size()) != n || int(g.inverse.size()) != n ||
      int(g.names.size()) != n || int(g.word_len.size()) != n)
    bad("shape");
  for (const auto& row : g.mult) {
    if (int(row.size()) != n) bad("shape");
    for (int v : row)
      if (v < 0 || v >= n) bad("entry out of range");
  }
  for (int i = 0; i < n; ++i)
    if (g.mult[0][i] != i || g.mult[i][0] != i) bad("identity");
  for (int i = 0; i < n; ++i)
    if (g.mult[i][g.inverse[i]] != 0 || g.mult[g.inverse[i]][i] != 0)
      bad("inverses");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (g.mult[g.mult[i][j]][k] != g.mult[i][g.mult[j][k]])
          bad("associativity");
  if (g.word_len[0] != 0) bad("identity word length");
}

std::vector<std::vector<int>> conjugacy_classes(const FiniteGroup& g) {
  std::vector<std::vector<int>> classes;
  std::vector<bool> seen(g.n, false);
  for (int i = 0; i < g.n; ++i) {
    if (seen[i]) continue;
    std::vector<int> cls;
    for (int z = 0; z < g.n; ++z) {
      int c = g.mult[g.mult[z][i]][g.inverse[z]];
      if (!seen[c]) {
        seen[c] = true;
        cls.push_back(c);
      }
    }
    std::sort(cls.begin(), cls.end());
    classes.push_back(std::move(cls));
  }
  return classes;
}

std::vector<int> centralizer(const FiniteGroup& g, int gamma) {
  std::vector<int> out;
  for (int z = 0; z < g.n; ++z)
    if (g.mult[z][gamma] == g.mult[gamma][z]) out.push_back(z);
  return out;
}

std::vector<int> conjugators(const FiniteGroup& g, int gamma,
                             const std::vector<int>& cls) {
  std::vector<int> zs;
  for (int target : cls) {
    int found = -1;
    for (int z = 0; z < g.n && found < 0; ++z)
      if (g.mult[g.mult[z][gamma]][g.inverse[z]] == target) found = z;
    if (found < 0)
      throw std::invalid_argument("conjugators: element not in the class");
    zs.push_back(found);
  }
  return zs;
}

double decay_constant(const std::vector<double>& norms,
                      const std::vector<int>& word_len, int order) {
  if (norms.size() != word_len.size())
    throw std::invalid_argument("decay_constant: length mismatch");
  double c = 0.0;
  for (size_t i = 0; i < norms.size(); ++i)
    c = std::max(c, norms[i] * std::pow(1.0 + word_len[i], double(order)));
  return c;
}

}  // namespace gbvp
