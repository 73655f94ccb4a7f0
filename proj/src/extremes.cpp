// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0

#include "dgff/extremes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dgff {

NormalizingConstants NormalizingConstants::from(std::int64_t N, double g0) {
  if (N < 3) throw std::invalid_argument("NormalizingConstants: need N >= 3");
  if (g0 <= 0) throw std::invalid_argument("NormalizingConstants: g0 must be positive");
  const double logN = std::log(static_cast<double>(N));
  const double root = std::sqrt(2.0 * logN);
  NormalizingConstants c;
  c.N = N;
  c.g0 = g0;
  c.b = std::sqrt(g0) * (root - (std::log(logN) + std::log(4.0 * std::numbers::pi)) / (2.0 * root));
  c.a = g0 / c.b;
  return c;
}

void LevelSet::validate() const {
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& [x, y] = intervals[i];
    if (std::isnan(x) || std::isnan(y) || x == inf || y == -inf)
      throw std::invalid_argument("LevelSet: bad interval endpoint");
    if (!(x <= y))  // degenerate (x, x] allowed, empty
      throw std::invalid_argument("LevelSet: interval must have x <= y");
    if (i > 0 && !(intervals[i - 1].second <= x))
      throw std::invalid_argument("LevelSet: intervals must be disjoint and ascending");
  }
}

double LevelSet::lower_edge() const {
  double z = std::numeric_limits<double>::infinity();
  for (const auto& [x, y] : intervals) z = std::min(z, x);
  return z;
}

Rectangle::Rectangle(std::vector<std::pair<double, double>> space_, LevelSet levels_)
    : space(std::move(space_)), levels(std::move(levels_)) {
  validate();
}

void Rectangle::validate() const {
  for (const auto& [lo, hi] : space) {
    if (!(lo <= hi) || lo < 0.0 || hi > 1.0)
      throw std::invalid_argument("Rectangle: spatial part must satisfy 0 <= lo <= hi <= 1");
  }
  levels.validate();
}

double Rectangle::space_volume() const {
  double v = 1.0;
  for (const auto& [lo, hi] : space) v *= hi - lo;
  return v;
}

bool Rectangle::contains_location(const double* x, int d) const {
  if (static_cast<int>(space.size()) != d) return false;
  for (int i = 0; i < d; ++i)
    if (x[i] < space[i].first || x[i] >= space[i].second) return false;
  return true;
}

bool Rectangle::spatially_disjoint(const Rectangle& other) const {
  for (std::size_t i = 0; i < space.size() && i < other.space.size(); ++i) {
    if (space[i].second <= other.space[i].first || other.space[i].second <= space[i].first)
      return true;
  }
  return false;
}

Rectangle cube_above(int d, double z) {
  Rectangle r;
  r.space.assign(d, {0.0, 1.0});
  r.levels = LevelSet{{z, std::numeric_limits<double>::infinity()}};
  return r;
}

PointPattern extract_points(const FieldSample& field, const NormalizingConstants& consts,
                            PatternSource source, double delta) {
  const LatticeBox& box = field.box;
  if (consts.N != box.site_count())
    throw std::invalid_argument("extract_points: constants built for a different site count");
  PointPattern pat;
  pat.d = box.d;
  pat.n = box.n;
  pat.source = source;
  pat.delta = source == PatternSource::bulk ? delta : 0.0;
  pat.consts = consts;

  std::vector<std::int64_t> sites;
  if (source == PatternSource::bulk) {
    sites = bulk_sites(box, delta);
    if (sites.empty()) {
      pat.empty_bulk_warning = true;
      return pat;
    }
  } else {
    sites.resize(box.site_count());
    for (std::int64_t i = 0; i < box.site_count(); ++i) sites[i] = i;
  }

  pat.locations.reserve(sites.size() * box.d);
  pat.heights.reserve(sites.size());
  const double inv_n = 1.0 / box.n;
  for (std::int64_t idx : sites) {
    const LatticePoint p = box.point_at(idx);
    for (int i = 0; i < box.d; ++i) pat.locations.push_back(p[i] * inv_n);
    pat.heights.push_back((field.values[idx] - consts.b) / consts.a);
  }
  return pat;
}

std::int64_t count_points(const PointPattern& pattern, const Rectangle& rect) {
  rect.validate();
  if (static_cast<int>(rect.space.size()) != pattern.d)
    throw std::invalid_argument("count_points: rectangle dimension mismatch");
  std::int64_t c = 0;
  for (std::int64_t i = 0; i < pattern.size(); ++i) {
    if (rect.contains_location(pattern.locations.data() + i * pattern.d, pattern.d) &&
        rect.levels.contains(pattern.heights[i]))
      ++c;
  }
  return c;
}

double max_rescaled(const FieldSample& field, const NormalizingConstants& consts) {
  if (field.values.empty()) throw std::invalid_argument("max_rescaled: empty field");
  const double mx = *std::max_element(field.values.begin(), field.values.end());
  return (mx - consts.b) / consts.a;
}

double intensity_mass(const Rectangle& rect, int d, PatternSource source, double delta) {
  double vol = 1.0;
  for (int i = 0; i < d; ++i) {
    double lo = rect.space[i].first, hi = rect.space[i].second;
    if (source == PatternSource::bulk) {
      lo = std::max(lo, delta);
      hi = std::min(hi, 1.0 - delta);
    }
    vol *= std::max(0.0, hi - lo);
  }
  return vol * rect.levels.exp_mass();
}

}  // namespace dgff
