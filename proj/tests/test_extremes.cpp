// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "dgff/extremes.hpp"
#include "dgff/steinchen.hpp"
#include "oracles.hpp"

using namespace dgff;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

std::shared_ptr<GreenTable> shared_green() {
  static auto g = std::make_shared<GreenTable>(3);
  return g;
}

// a pattern with prescribed heights on the full box of side n
PointPattern synthetic_pattern(int n, const NormalizingConstants& consts,
                               const std::vector<double>& heights) {
  LatticeBox box(3, n);
  FieldSample f;
  f.box = box;
  f.values.resize(box.site_count());
  for (std::int64_t i = 0; i < box.site_count(); ++i)
    f.values[i] = consts.b + consts.a * heights[i];
  return extract_points(f, consts, PatternSource::full_box);
}

}  // namespace

TEST_CASE("normalizing constants against the extended-precision oracle") {
  const double g0 = shared_green()->g0();
  for (std::int64_t N : {512LL, 4096LL, 32768LL}) {
    const auto c = NormalizingConstants::from(N, g0);
    const auto ref = oracle::constants_ld(N, static_cast<long double>(g0));
    CHECK(c.b == doctest::Approx(static_cast<double>(ref.b)).epsilon(1e-14));
    CHECK(c.a == doctest::Approx(static_cast<double>(ref.a)).epsilon(1e-14));
    CHECK(c.a * c.b == doctest::Approx(g0).epsilon(1e-15));  // exact identity
    CHECK(c.b > 0.0);
  }
  // frozen values at N = 4096 (independently computed from the formula)
  const auto c = NormalizingConstants::from(4096, g0);
  CHECK(c.b == doctest::Approx(4.3206706316238).epsilon(1e-9));
  CHECK(c.a == doctest::Approx(0.3509608087349).epsilon(1e-9));
  // growth in N
  CHECK(NormalizingConstants::from(32768, g0).b > c.b);
  CHECK(NormalizingConstants::from(32768, g0).a < c.a);
  CHECK_THROWS_AS(NormalizingConstants::from(2, g0), std::invalid_argument);
}

TEST_CASE("threshold map u_N(z) is affine and increasing") {
  const auto c = NormalizingConstants::from(4096, shared_green()->g0());
  CHECK(c.threshold(0.0) == c.b);
  CHECK(c.threshold(1.0) == doctest::Approx(4.67163144035874).epsilon(1e-10));
  CHECK(c.threshold(2.5) - c.threshold(0.7) == doctest::Approx(c.a * 1.8).epsilon(1e-12));
  CHECK(c.threshold(1.0) > c.threshold(0.0));
}

TEST_CASE("level sets validate and integrate e^{-z}") {
  CHECK_THROWS_AS(LevelSet({{1.0, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(LevelSet({{0.0, 2.0}, {1.0, 3.0}}), std::invalid_argument);
  const LevelSet r{{0.0, 1.0}, {2.0, kInf}};
  CHECK(r.exp_mass() == doctest::Approx(1.0 - std::exp(-1.0) + std::exp(-2.0)));
  CHECK(r.contains(0.5));
  CHECK(!r.contains(0.0));  // half-open (x, y]
  CHECK(r.contains(1.0));
  CHECK(r.contains(100.0));
  CHECK(r.lower_edge() == 0.0);
  // degenerate (z, z] is empty
  const LevelSet d{{1.0, 1.0}};
  CHECK(!d.contains(1.0));
  CHECK(d.exp_mass() == 0.0);
}

TEST_CASE("constant field at b_N rescales to all-zero heights") {
  const auto c = NormalizingConstants::from(64, shared_green()->g0());
  const auto pat = synthetic_pattern(4, c, std::vector<double>(64, 0.0));
  CHECK(pat.size() == 64);
  for (double h : pat.heights) CHECK(h == doctest::Approx(0.0));
  CHECK(max_rescaled(FieldSample{LatticeBox(3, 4), FieldKind::zero_boundary,
                                 SampleMethod::factorization, 0, 0.0,
                                 std::vector<double>(64, c.b)},
                     c) == doctest::Approx(0.0));
}

TEST_CASE("one spiked site gives exactly one point above level zero") {
  const auto c = NormalizingConstants::from(64, shared_green()->g0());
  std::vector<double> heights(64, -50.0);
  heights[13] = 1.0;
  const auto pat = synthetic_pattern(4, c, heights);
  const Rectangle above0 = cube_above(3, 0.0);
  CHECK(count_points(pat, above0) == 1);
  CHECK(max_rescaled(FieldSample{LatticeBox(3, 4), FieldKind::zero_boundary,
                                 SampleMethod::factorization, 0, 0.0,
                                 [&] {
                                   std::vector<double> v(64);
                                   for (int i = 0; i < 64; ++i)
                                     v[i] = c.b + c.a * heights[i];
                                   return v;
                                 }()},
                     c) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("counts: empty spatial part, whole space, additivity, monotonicity") {
  const auto c = NormalizingConstants::from(512, shared_green()->g0());
  oracle::FastRng rng(77);
  std::vector<double> heights(512);
  for (double& h : heights) h = -std::log(-std::log(rng.uniform()));
  const auto pat = synthetic_pattern(8, c, heights);

  Rectangle empty_a({{0.3, 0.3}, {0.0, 1.0}, {0.0, 1.0}}, LevelSet{{-kInf, kInf}});
  CHECK(count_points(pat, empty_a) == 0);

  Rectangle everything({{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}, LevelSet{{-kInf, kInf}});
  CHECK(count_points(pat, everything) == 512);

  // spatial additivity across a split of [0,1)
  Rectangle left({{0.0, 0.5}, {0.0, 1.0}, {0.0, 1.0}}, LevelSet{{0.0, kInf}});
  Rectangle right({{0.5, 1.0}, {0.0, 1.0}, {0.0, 1.0}}, LevelSet{{0.0, kInf}});
  CHECK(count_points(pat, left) + count_points(pat, right) ==
        count_points(pat, cube_above(3, 0.0)));

  // level additivity
  Rectangle band({{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}, LevelSet{{-1.0, 0.0}});
  CHECK(count_points(pat, band) + count_points(pat, cube_above(3, 0.0)) ==
        count_points(pat, cube_above(3, -1.0)));

  // counts above z are nonincreasing in z
  std::int64_t prev = count_points(pat, cube_above(3, -3.0));
  for (double z : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
    const std::int64_t cnt = count_points(pat, cube_above(3, z));
    CHECK(cnt <= prev);
    prev = cnt;
  }
}

TEST_CASE("bulk pattern is the full pattern restricted to bulk locations") {
  LatticeBox box(3, 8);
  FieldSampler sampler(shared_green());
  const auto c = NormalizingConstants::from(box.site_count(), shared_green()->g0());
  const FieldSample f = sampler.zero_boundary(box, RngSpec{21});
  const auto full = extract_points(f, c, PatternSource::full_box);
  const auto bulk = extract_points(f, c, PatternSource::bulk, 0.25);
  CHECK(bulk.size() == 64);
  CHECK_FALSE(bulk.empty_bulk_warning);

  // every bulk point appears in the full pattern with the same height
  std::int64_t matched = 0;
  for (std::int64_t i = 0; i < bulk.size(); ++i) {
    for (std::int64_t j = 0; j < full.size(); ++j) {
      bool same = true;
      for (int k = 0; k < 3; ++k)
        same = same && bulk.locations[i * 3 + k] == full.locations[j * 3 + k];
      if (same) {
        CHECK(bulk.heights[i] == full.heights[j]);
        ++matched;
        break;
      }
    }
  }
  CHECK(matched == bulk.size());

  // max over the full box equals the top height of the full pattern
  const double mx = max_rescaled(f, c);
  double top = -kInf;
  for (double h : full.heights) top = std::max(top, h);
  CHECK(mx == doctest::Approx(top));
}

TEST_CASE("intensity mass |A| (e^-x - e^-y) with bulk restriction") {
  Rectangle r({{0.0, 0.5}, {0.0, 1.0}, {0.25, 0.75}}, LevelSet{{0.0, 1.0}});
  const double want = 0.5 * 1.0 * 0.5 * (1.0 - std::exp(-1.0));
  CHECK(intensity_mass(r, 3, PatternSource::full_box) == doctest::Approx(want));
  // restriction to [delta, 1-delta]^3 at delta = 0.25
  const double bulk_vol = 0.25 * 0.5 * 0.5;
  CHECK(intensity_mass(r, 3, PatternSource::bulk, 0.25) ==
        doctest::Approx(bulk_vol * (1.0 - std::exp(-1.0))));
}

TEST_CASE("mean count matches the per-site tail sum at modest replication") {
  LatticeBox box(3, 8);
  FieldSampler sampler(shared_green());
  const auto c = NormalizingConstants::from(box.site_count(), shared_green()->g0());
  const Rectangle rect = cube_above(3, 0.0);

  // oracle: sum of per-site Gaussian tails with solver variances
  BoxKernel kernel(box);
  const auto diag = kernel.diagonal();
  double oracle = 0.0;
  for (double v : diag) oracle += 0.5 * std::erfc(c.threshold(0.0) / std::sqrt(2.0 * v));

  const int M = 3000;
  RngSpec rng{22};
  double s = 0, s2 = 0;
  for (int r = 0; r < M; ++r) {
    const FieldSample f = sampler.zero_boundary(box, rng.substream(r));
    const auto cnt = count_points(extract_points(f, c, PatternSource::full_box), rect);
    s += cnt;
    s2 += static_cast<double>(cnt) * cnt;
  }
  const double mean = s / M;
  const double se = std::sqrt((s2 / M - mean * mean) / M);
  CHECK(std::abs(mean - oracle) < 4.0 * se);
}

TEST_CASE("bulk extraction warns once the cut reaches the center") {
  LatticeBox box(3, 4);
  FieldSampler sampler(shared_green());
  const auto c = NormalizingConstants::from(box.site_count(), shared_green()->g0());
  const FieldSample f = sampler.zero_boundary(box, RngSpec{23});
  const auto pat = extract_points(f, c, PatternSource::bulk, 0.5);
  CHECK(pat.size() == 0);
  CHECK(pat.empty_bulk_warning);
}
