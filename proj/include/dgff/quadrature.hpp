// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

namespace dgff {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> node;
  std::vector<double> weight;
};

/// Newton iteration on Legendre polynomials; cached per order.
inline const GaussRule& gauss_legendre(int m) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;

  GaussRule r;
  r.node.resize(m);
  r.weight.resize(m);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < m; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = m * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.node[i] = -x;
    r.node[m - 1 - i] = x;
    r.weight[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    r.weight[m - 1 - i] = r.weight[i];
  }
  return cache.emplace(m, std::move(r)).first->second;
}

/// Nodes/weights mapped to [lo, hi].
inline void gauss_on_interval(int m, double lo, double hi, std::vector<double>& x,
                              std::vector<double>& w) {
  const GaussRule& r = gauss_legendre(m);
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  x.resize(m);
  w.resize(m);
  for (int i = 0; i < m; ++i) {
    x[i] = mid + half * r.node[i];
    w[i] = half * r.weight[i];
  }
}

/// Integrate f over [lo, hi] with fixed-order Gauss-Legendre.
template <class F>
double gauss_integrate(F&& f, double lo, double hi, int m) {
  std::vector<double> x, w;
  gauss_on_interval(m, lo, hi, x, w);
  double s = 0.0;
  for (int i = 0; i < m; ++i) s += w[i] * f(x[i]);
  return s;
}

}  // namespace dgff
