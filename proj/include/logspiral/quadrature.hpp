#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "logspiral/params.hpp"

// Composite Gauss-Legendre quadrature.  Used for the kernel identity
// residuals (CLI sidecar) and as the integration oracle in the test suite.
// Integrands here are piecewise analytic with known breakpoints (the kernel
// derivative jumps), so panels between breakpoints converge geometrically;
// panel doubling with a fixed-order rule is enough.

namespace logspiral {

struct GaussRule {
  std::vector<double> nodes;    // on (-1, 1), ascending
  std::vector<double> weights;
};

/// k-point Gauss-Legendre rule via Newton iteration on P_k.
inline GaussRule gauss_legendre(int k) {
  if (k < 2) throw std::invalid_argument("gauss_legendre: order must be >= 2");
  GaussRule r;
  r.nodes.resize(static_cast<std::size_t>(k));
  r.weights.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(k) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 64; ++it) {
      double pm = 1.0, p = x;
      for (int j = 2; j <= k; ++j) {
        const double t = ((2.0 * j - 1.0) * x * p - (j - 1.0) * pm) / static_cast<double>(j);
        pm = p;
        p = t;
      }
      dp = static_cast<double>(k) * (x * p - pm) / (x * x - 1.0);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    {  // refresh derivative at the converged node for the weight
      double pm = 1.0, p = x;
      for (int j = 2; j <= k; ++j) {
        const double t = ((2.0 * j - 1.0) * x * p - (j - 1.0) * pm) / static_cast<double>(j);
        pm = p;
        p = t;
      }
      dp = static_cast<double>(k) * (x * p - pm) / (x * x - 1.0);
    }
    r.nodes[static_cast<std::size_t>(k - 1 - i)] = x;
    r.weights[static_cast<std::size_t>(k - 1 - i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

/// Fixed-panel composite rule on [a, b].
template <class F>
double integrate_panels(F&& f, double a, double b, int panels, const GaussRule& rule) {
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    double panel = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j)
      panel += rule.weights[j] * f(mid + 0.5 * h * rule.nodes[j]);
    sum += 0.5 * h * panel;
  }
  return sum;
}

/// Composite quadrature over [a, b] split at interior breakpoints, doubling
/// panel counts until two successive refinements agree to tol (mixed
/// absolute/relative).  Throws if the doubling budget is exhausted.
template <class F>
double integrate_adaptive(F&& f, double a, double b, std::vector<double> breakpoints,
                          double tol = 1e-9) {
  if (!(b > a)) throw std::invalid_argument("integrate_adaptive: need b > a");
  breakpoints.push_back(a);
  breakpoints.push_back(b);
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end(),
                                [](double x, double y) { return std::abs(x - y) < 1e-14; }),
                    breakpoints.end());

  const GaussRule rule = gauss_legendre(16);
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < breakpoints.size(); ++s) {
    const double lo = std::max(a, breakpoints[s]);
    const double hi = std::min(b, breakpoints[s + 1]);
    if (!(hi > lo)) continue;
    double prev = integrate_panels(f, lo, hi, 1, rule);
    bool converged = false;
    for (int panels = 2; panels <= (1 << 14); panels *= 2) {
      const double cur = integrate_panels(f, lo, hi, panels, rule);
      if (std::abs(cur - prev) <= tol * (1.0 + std::abs(cur))) {
        prev = cur;
        converged = true;
        break;
      }
      prev = cur;
    }
    if (!converged)
      throw std::runtime_error("integrate_adaptive: panel doubling did not converge");
    total += prev;
  }
  return total;
}

}  // namespace logspiral
