// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dgff {

/// A site of Z^d, one coordinate per dimension.
using LatticePoint = std::vector<int>;

inline int linf_norm(const LatticePoint& p) {
  int m = 0;
  for (int c : p) m = std::max(m, std::abs(c));
  return m;
}

inline LatticePoint sub(const LatticePoint& a, const LatticePoint& b) {
  LatticePoint r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

/// The hypercube V = [0, n-1]^d with N = n^d sites.
///
/// Sites are ordered lexicographically with the last coordinate fastest;
/// this ordering is part of the file-format and seeding contract and must
/// not change.
struct LatticeBox {
  int d = 3;
  int n = 1;
  double delta = 0.25;  // default bulk parameter, in (0, 1/2)

  LatticeBox() = default;
  LatticeBox(int d_, int n_, double delta_ = 0.25) : d(d_), n(n_), delta(delta_) {
    if (d < 3) throw std::invalid_argument("LatticeBox: dimension must be >= 3");
    if (n < 1) throw std::invalid_argument("LatticeBox: side must be positive");
  }

  std::int64_t site_count() const {
    std::int64_t N = 1;
    for (int i = 0; i < d; ++i) N *= n;
    return N;
  }

  bool contains(const LatticePoint& p) const {
    if (static_cast<int>(p.size()) != d) return false;
    for (int c : p)
      if (c < 0 || c >= n) return false;
    return true;
  }

  std::int64_t index_of(const LatticePoint& p) const {
    std::int64_t idx = 0;
    for (int i = 0; i < d; ++i) idx = idx * n + p[i];
    return idx;
  }

  LatticePoint point_at(std::int64_t idx) const {
    LatticePoint p(d);
    for (int i = d - 1; i >= 0; --i) {
      p[i] = static_cast<int>(idx % n);
      idx /= n;
    }
    return p;
  }

  /// l-infinity distance from a site to the box complement Z^d \ V.
  /// The nearest outside site differs in a single coordinate, so the
  /// distance is min_i min(c_i + 1, n - c_i).
  int boundary_distance(const LatticePoint& p) const {
    int dist = n + 1;
    for (int i = 0; i < d; ++i) dist = std::min(dist, std::min(p[i] + 1, n - p[i]));
    return dist;
  }

  std::string signature() const { return "d" + std::to_string(d) + "n" + std::to_string(n); }
};

/// Bulk coordinate range: a coordinate c is bulk iff min(c+1, n-c) > delta*n.
/// Returns {lo, hi} inclusive, lo > hi when the bulk is empty.
inline std::pair<int, int> bulk_coordinate_range(const LatticeBox& box, double delta) {
  const double cut = delta * box.n;
  int lo = box.n, hi = -1;
  for (int c = 0; c < box.n; ++c) {
    if (std::min(c + 1, box.n - c) > cut) {
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
  }
  return {lo, hi};
}

/// Sites of V at l-infinity distance > delta*n from the complement
/// (flat indices, ascending). Empty only when delta*n reaches the box
/// center, which needs delta >= 1/2.
inline std::vector<std::int64_t> bulk_sites(const LatticeBox& box, double delta) {
  if (delta <= 0) throw std::invalid_argument("bulk: delta must be positive");
  auto [lo, hi] = bulk_coordinate_range(box, delta);
  std::vector<std::int64_t> out;
  if (lo > hi) return out;
  const int w = hi - lo + 1;
  std::int64_t count = 1;
  for (int i = 0; i < box.d; ++i) count *= w;
  out.reserve(count);
  LatticePoint p(box.d, lo);
  for (std::int64_t k = 0; k < count; ++k) {
    std::int64_t rem = k;
    for (int i = box.d - 1; i >= 0; --i) {
      p[i] = lo + static_cast<int>(rem % w);
      rem /= w;
    }
    out.push_back(box.index_of(p));
  }
  return out;
}

/// Certified shape of the bulk covariance gap (Lemma-style bound):
/// C_d * (delta * N^{1/d})^{2-d}. C_d is a calibration parameter.
inline double bulk_gap_bound(const LatticeBox& box, double delta, double c_d) {
  if (c_d <= 0) throw std::invalid_argument("bulk_gap_bound: C_d must be positive");
  return c_d * std::pow(delta * box.n, 2.0 - box.d);  // N^{1/d} = n
}

}  // namespace dgff
