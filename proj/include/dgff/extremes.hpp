// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "dgff/lattice.hpp"
#include "dgff/sampler.hpp"

namespace dgff {

/// Gumbel centering/scaling for the rescaled field maximum:
///   b_N = sqrt(g0) [ sqrt(2 log N) - (log log N + log 4pi) / (2 sqrt(2 log N)) ],
///   a_N = g0 / b_N.
struct NormalizingConstants {
  std::int64_t N = 0;
  double g0 = 0.0;
  double b = 0.0;
  double a = 0.0;

  static NormalizingConstants from(std::int64_t N, double g0);

  /// u_N(z) = a_N z + b_N; strictly increasing affine map.
  double threshold(double z) const { return a * z + b; }
};

/// Finite union of disjoint half-open level intervals (x, y], y may be
/// +infinity. Intervals are kept sorted and strictly separated.
struct LevelSet {
  std::vector<std::pair<double, double>> intervals;

  LevelSet() = default;
  LevelSet(std::initializer_list<std::pair<double, double>> iv) : intervals(iv) { validate(); }
  explicit LevelSet(std::vector<std::pair<double, double>> iv) : intervals(std::move(iv)) {
    validate();
  }
  void validate() const;

  bool contains(double h) const {
    for (const auto& [x, y] : intervals)
      if (h > x && h <= y) return true;
    return false;
  }

  /// omega(R) = integral of e^{-z} dz over the set, e^{-inf} = 0.
  double exp_mass() const {
    double m = 0.0;
    for (const auto& [x, y] : intervals)
      m += std::exp(-x) - (std::isinf(y) ? 0.0 : std::exp(-y));
    return m;
  }

  /// Smallest z with R subset (z, +inf].
  double lower_edge() const;
};

/// Product rectangle A x R: axis-aligned spatial part with per-axis
/// [lo, hi) in [0,1], times a level set.
struct Rectangle {
  std::vector<std::pair<double, double>> space;  // per-axis [lo, hi)
  LevelSet levels;

  Rectangle() = default;
  Rectangle(std::vector<std::pair<double, double>> space_, LevelSet levels_);
  void validate() const;

  double space_volume() const;
  bool contains_location(const double* x, int d) const;
  bool spatially_disjoint(const Rectangle& other) const;
};

/// Full unit cube at every level above z.
Rectangle cube_above(int d, double z);

enum class PatternSource { full_box, bulk };

/// The rescaled extremal points {(alpha/n, (value_alpha - b_N)/a_N)}, one
/// per source site. Heights can be arbitrarily negative; the pattern is
/// locally finite only above any fixed level.
struct PointPattern {
  int d = 3;
  int n = 1;
  PatternSource source = PatternSource::full_box;
  double delta = 0.0;  // only meaningful for bulk patterns
  NormalizingConstants consts;
  std::vector<double> locations;  // flattened, d per point
  std::vector<double> heights;
  bool empty_bulk_warning = false;

  std::int64_t size() const { return static_cast<std::int64_t>(heights.size()); }
};

PointPattern extract_points(const FieldSample& field, const NormalizingConstants& consts,
                            PatternSource source, double delta = 0.25);

std::int64_t count_points(const PointPattern& pattern, const Rectangle& rect);

/// (max over sites - b_N) / a_N.
double max_rescaled(const FieldSample& field, const NormalizingConstants& consts);

/// Limit intensity mass of A x R: |A ∩ domain| * omega(R), with domain the
/// unit cube for full_box and [delta, 1-delta]^d for bulk.
double intensity_mass(const Rectangle& rect, int d, PatternSource source, double delta = 0.0);

}  // namespace dgff
