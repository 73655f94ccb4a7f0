// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0

#include "dgff/box_kernel.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "dgff/quadrature.hpp"

namespace dgff {

BoxKernel::BoxKernel(const LatticeBox& box, int nodes_per_panel) : box_(box) {
  if (box_.d > 8) throw std::invalid_argument("BoxKernel: d > 8 not supported");
  const int n = box_.n;
  const double theta0 = std::numbers::pi / (n + 1);
  // slowest decay rate of the integrand product is (1 - cos theta_1)
  const double t_max = 40.0 / (1.0 - std::cos(theta0));

  double lo = 0.0, width = 1.0;
  std::vector<double> xs, ws;
  while (lo < t_max) {
    const double hi = lo + width;
    gauss_on_interval(nodes_per_panel, lo, hi, xs, ws);
    t_nodes_.insert(t_nodes_.end(), xs.begin(), xs.end());
    t_weights_.insert(t_weights_.end(), ws.begin(), ws.end());
    lo = hi;
    width *= 1.6;
  }

  const std::size_t nodes = t_nodes_.size();
  decay_.resize(nodes * n);
  for (std::size_t q = 0; q < nodes; ++q) {
    const double t_over_d = t_nodes_[q] / box_.d;
    for (int k = 0; k < n; ++k) {
      const double rate = 1.0 - std::cos(theta0 * (k + 1));
      decay_[q * n + k] = std::exp(-t_over_d * rate);
    }
  }
}

namespace {

// S[p][node] for each coordinate pair, sin tables shared per value
std::vector<double> pair_table(const LatticeBox& box, const std::vector<double>& decay,
                               std::size_t nodes,
                               const std::vector<std::pair<int, int>>& pairs) {
  const int n = box.n;
  const double theta0 = std::numbers::pi / (n + 1);
  std::map<int, std::vector<double>> sin_tab;
  for (const auto& [a, b] : pairs) {
    for (int v : {a, b}) {
      if (!sin_tab.count(v)) {
        auto& tab = sin_tab[v];
        tab.resize(n);
        for (int k = 0; k < n; ++k) tab[k] = std::sin(theta0 * (k + 1) * (v + 1));
      }
    }
  }
  std::vector<double> S(pairs.size() * nodes);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& sa = sin_tab[pairs[p].first];
    const auto& sb = sin_tab[pairs[p].second];
    for (std::size_t q = 0; q < nodes; ++q) {
      const double* dk = decay.data() + q * n;
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += sa[k] * sb[k] * dk[k];
      S[p * nodes + q] = 2.0 * s / (n + 1);
    }
  }
  return S;
}

}  // namespace

double BoxKernel::entry(const LatticePoint& a, const LatticePoint& b) const {
  if (!box_.contains(a) || !box_.contains(b))
    throw std::invalid_argument("BoxKernel::entry: point outside the box");
  const std::size_t nodes = t_nodes_.size();
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> which(box_.d);
  for (int i = 0; i < box_.d; ++i) {
    std::pair<int, int> pr{a[i], b[i]};
    auto it = std::find(pairs.begin(), pairs.end(), pr);
    which[i] = static_cast<int>(it - pairs.begin());
    if (it == pairs.end()) pairs.push_back(pr);
  }
  std::vector<double> S = pair_table(box_, decay_, nodes, pairs);
  double total = 0.0;
  for (std::size_t q = 0; q < nodes; ++q) {
    double prod = t_weights_[q];
    for (int i = 0; i < box_.d; ++i) prod *= S[which[i] * nodes + q];
    total += prod;
  }
  return total;
}

std::vector<double> BoxKernel::window_diagonal(int start, int width) const {
  if (start < 0 || start + width > box_.n)
    throw std::invalid_argument("BoxKernel::window_diagonal: window outside the box");
  const int n = box_.n;
  const std::size_t nodes = t_nodes_.size();

  // coordinates fold by the reflection c -> n-1-c
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> pair_of_coord(width);
  std::map<int, int> fold_index;
  for (int c = start; c < start + width; ++c) {
    const int f = std::min(c, n - 1 - c);
    auto it = fold_index.find(f);
    if (it == fold_index.end()) {
      fold_index.emplace(f, static_cast<int>(pairs.size()));
      pair_of_coord[c - start] = static_cast<int>(pairs.size());
      pairs.emplace_back(f, f);
    } else {
      pair_of_coord[c - start] = it->second;
    }
  }
  std::vector<double> S = pair_table(box_, decay_, nodes, pairs);

  std::int64_t count = 1;
  for (int i = 0; i < box_.d; ++i) count *= width;
  std::vector<double> out(count);
  std::vector<int> coord(box_.d, 0);
  for (std::int64_t idx = 0; idx < count; ++idx) {
    std::int64_t rem = idx;
    double acc = 0.0;
    // product over axes, summed over t nodes
    const double* rows[8];
    for (int i = box_.d - 1; i >= 0; --i) {
      coord[i] = static_cast<int>(rem % width);
      rem /= width;
      rows[i] = S.data() + static_cast<std::size_t>(pair_of_coord[coord[i]]) * nodes;
    }
    for (std::size_t q = 0; q < nodes; ++q) {
      double prod = t_weights_[q];
      for (int i = 0; i < box_.d; ++i) prod *= rows[i][q];
      acc += prod;
    }
    out[idx] = acc;
  }
  return out;
}

std::vector<double> BoxKernel::diagonal() const { return window_diagonal(0, box_.n); }

}  // namespace dgff
