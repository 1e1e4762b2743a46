#pragma once
// Shared aliases, tolerances, cutoff profiles and error types.

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>
#include <cmath>
#include <Eigen/Dense>

namespace gbvp {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

// Pole bookkeeping: poles closer to the real axis than this are rejected,
// poles closer to each other than this (relative) are merged, coefficients
// below this (relative) are dropped.
inline constexpr double kPoleImagMin = 1e-8;
inline constexpr double kPoleMergeTol = 1e-11;
inline constexpr double kCoeffPruneTol = 1e-15;

// Error hierarchy mapped to CLI exit codes 1/2/3.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotInvertibleError : std::runtime_error {
  std::string location;
  NotInvertibleError(const std::string& msg, std::string loc)
      : std::runtime_error(msg + " at " + loc), location(std::move(loc)) {}
};

struct NoSpectralGapError : std::runtime_error {
  explicit NoSpectralGapError(const std::string& msg) : std::runtime_error(msg) {}
};

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * double(n - k + j) / double(j);
  return r;
}

// Polynomial smoothstep: the regularized incomplete beta I_t(k+1,k+1),
// C^k at both joins, exact value and first derivative.
struct SmoothStep {
  int k = 6;
  double value(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const int n = 2 * k + 1;
    double s = 0.0;
    for (int j = k + 1; j <= n; ++j)
      s += binomial(n, j) * std::pow(t, j) * std::pow(1.0 - t, n - j);
    return s;
  }
  double deriv(double t) const {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    // d/dt I_t = t^k (1-t)^k / B(k+1,k+1), B = (k!)^2/(2k+1)!
    double invb = double(2 * k + 1) * binomial(2 * k, k);
    return std::pow(t * (1.0 - t), k) * invb;
  }
};

// Cutoff profile chi: 0 below lo, 1 above hi, smoothstep between.
struct Cutoff {
  double lo = 0.15, hi = 1.0;
  SmoothStep step{6};
  double chi(double r) const { return step.value((r - lo) / (hi - lo)); }
  double dchi(double r) const { return step.deriv((r - lo) / (hi - lo)) / (hi - lo); }
};

// Scale profile lambda: equals r for r >= 1, smoothly pinned to 1 near 0.
// lambda(r) = 1 + (r - 1) * s((r - s_lo)/(1 - s_lo)).
struct ScaleProfile {
  double lo = 0.2;
  SmoothStep step{6};
  double lam(double r) const {
    if (r >= 1.0) return r;
    return 1.0 + (r - 1.0) * step.value((r - lo) / (1.0 - lo));
  }
  double dlam(double r) const {
    if (r >= 1.0) return 1.0;
    double t = (r - lo) / (1.0 - lo);
    return step.value(t) + (r - 1.0) * step.deriv(t) / (1.0 - lo);
  }
};

// Extension profile bundle; two admissible variants are provided so that
// independence of the final pairing from this choice can be checked.
struct ExtensionProfile {
  Cutoff chi;
  ScaleProfile lam;
  static ExtensionProfile variant_a() {
    ExtensionProfile p;
    p.chi = Cutoff{0.15, 1.0, SmoothStep{6}};
    p.lam = ScaleProfile{0.2, SmoothStep{6}};
    return p;
  }
  static ExtensionProfile variant_b() {
    ExtensionProfile p;
    p.chi = Cutoff{0.30, 1.0, SmoothStep{8}};
    p.lam = ScaleProfile{0.35, SmoothStep{8}};
    return p;
  }
};

// Gauss-Legendre nodes/weights on [-1,1], computed by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
      }
      double dp = n * (t * p0 - p1) / (t * t - 1.0);
      double dt = p0 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    double p0 = 1.0, p1 = 0.0;
    for (int j = 0; j < n; ++j) {
      double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
    }
    double dp = n * (t * p0 - p1) / (t * t - 1.0);
    x[i] = -t;
    x[n - 1 - i] = t;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

}  // namespace gbvp
