// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <set>

#include "dgff/lattice.hpp"
#include "dgff/rng.hpp"
#include "oracles.hpp"

using namespace dgff;

TEST_CASE("box indexing round-trips, lexicographic with last axis fastest") {
  LatticeBox box(3, 5);
  CHECK(box.site_count() == 125);
  CHECK(box.index_of({0, 0, 0}) == 0);
  CHECK(box.index_of({0, 0, 1}) == 1);
  CHECK(box.index_of({0, 1, 0}) == 5);
  CHECK(box.index_of({1, 0, 0}) == 25);

  oracle::FastRng rng(42);
  for (int i = 0; i < 200; ++i) {
    const std::int64_t idx = static_cast<std::int64_t>(rng.next() % 125);
    CHECK(box.index_of(box.point_at(idx)) == idx);
  }
}

TEST_CASE("box rejects bad parameters") {
  CHECK_THROWS_AS(LatticeBox(2, 8), std::invalid_argument);
  CHECK_THROWS_AS(LatticeBox(3, 0), std::invalid_argument);
}

TEST_CASE("boundary distance is min over axes of min(c+1, n-c)") {
  LatticeBox box(3, 8);
  CHECK(box.boundary_distance({0, 4, 4}) == 1);
  CHECK(box.boundary_distance({3, 4, 4}) == 4);
  CHECK(box.boundary_distance({7, 7, 7}) == 1);
  CHECK(box.boundary_distance({2, 5, 3}) == 3);
}

TEST_CASE("substreams are distinct and deterministic") {
  RngSpec spec{987654321};
  std::set<std::uint64_t> seeds;
  for (std::uint64_t k = 0; k < 1000; ++k) seeds.insert(spec.substream(k).master_seed);
  CHECK(seeds.size() == 1000);

  GaussianStream a(spec), b(spec);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("gaussian stream has unit variance and independent substreams") {
  RngSpec spec{5};
  const int M = 200000;
  double s = 0, s2 = 0, cross = 0;
  GaussianStream g0(spec.substream(0)), g1(spec.substream(1));
  for (int i = 0; i < M; ++i) {
    const double x = g0.next(), y = g1.next();
    s += x;
    s2 += x * x;
    cross += x * y;
  }
  const double mean = s / M, var = s2 / M - mean * mean, corr = cross / M;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(M)));
  CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / M));
  CHECK(std::abs(corr) < 4.0 / std::sqrt(static_cast<double>(M)));
}

TEST_CASE("uniform draws never hit zero") {
  GaussianStream g(RngSpec{7});
  for (int i = 0; i < 100000; ++i) {
    const double u = g.uniform();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
  }
}
