// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
//
// Test-side oracles. Everything here is an independent computational path
// used to check the library: a random-walk simulator for Green's function
// values, reference samplers for Poisson and Gumbel variates, and a
// long-double evaluation of the normalizing constants.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dgff/green.hpp"
#include "dgff/lattice.hpp"
#include "dgff/parallel.hpp"
#include "dgff/rng.hpp"

namespace oracle {

// xoshiro256++, seeded through splitmix64
struct FastRng {
  std::uint64_t s[4];
  explicit FastRng(std::uint64_t seed) {
    for (auto& w : s) w = dgff::splitmix64(seed += 0x9e3779b97f4a7c15ULL);
  }
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t next() {
    const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }
  double uniform() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1p-53; }
};

// unbiased direction in {0..5}: 3-bit slices, values 6 and 7 rejected
struct DirectionSource {
  FastRng rng;
  std::uint64_t buf = 0;
  int have = 0;
  explicit DirectionSource(std::uint64_t seed) : rng(seed) {}
  int next_dir() {
    for (;;) {
      if (have == 0) {
        buf = rng.next();
        have = 21;  // 63 usable bits
      }
      const unsigned bits = buf & 7;
      buf >>= 3;
      --have;
      if (bits < 6) return static_cast<int>(bits);
    }
  }
};

struct McEstimate {
  double value = 0.0;
  double se = 0.0;
};

// Monte Carlo of g(0) for simple random walk on Z^3: count visits to the
// origin until the walk leaves the l-infinity ball of the given radius,
// then close the tail with the exact identity
//   g(0) = E[#visits before exit] + E[g(S_exit)],
// which follows from the strong Markov property and P_x(hit 0) = g(x)/g(0).
// The table only enters through the small correction term E[g(S_exit)]
// (about 5% of the total at radius 5), so the estimate is an independent
// check of the quadrature at the 1e-4 scale.
inline McEstimate mc_green_origin_z3(const dgff::GreenTable& green, std::uint64_t seed,
                                     std::int64_t walks, int radius, int threads) {
  green.ensure_cube(radius + 1);
  // lock-free local copy of the table for the exit correction
  const int side = 2 * radius + 3, off = radius + 1;
  std::vector<double> g_local(static_cast<std::size_t>(side) * side * side);
  for (int x = -radius - 1; x <= radius + 1; ++x)
    for (int y = -radius - 1; y <= radius + 1; ++y)
      for (int z = -radius - 1; z <= radius + 1; ++z)
        g_local[((x + off) * side + (y + off)) * side + (z + off)] =
            green.infinite({x, y, z});

  const int blocks = 64;
  std::vector<double> sum(blocks, 0.0), sumsq(blocks, 0.0);
  dgff::parallel_for(blocks, threads, [&](std::int64_t blk) {
    DirectionSource dirs(dgff::splitmix64(seed ^ (0x5b5ad4eULL + blk)));
    const std::int64_t lo = walks * blk / blocks, hi = walks * (blk + 1) / blocks;
    double s = 0.0, s2 = 0.0;
    for (std::int64_t w = lo; w < hi; ++w) {
      int x = 0, y = 0, z = 0;
      int visits = 1;
      for (;;) {
        switch (dirs.next_dir()) {
          case 0: ++x; break;
          case 1: --x; break;
          case 2: ++y; break;
          case 3: --y; break;
          case 4: ++z; break;
          default: --z; break;
        }
        if (x > radius || x < -radius || y > radius || y < -radius || z > radius ||
            z < -radius)
          break;
        if ((x | y | z) == 0) ++visits;
      }
      const double v = visits + g_local[((x + off) * side + (y + off)) * side + (z + off)];
      s += v;
      s2 += v * v;
    }
    sum[blk] = s;
    sumsq[blk] = s2;
  });
  double s = 0.0, s2 = 0.0;
  for (int b = 0; b < blocks; ++b) {
    s += sum[b];
    s2 += sumsq[b];
  }
  const double mean = s / walks;
  const double var = s2 / walks - mean * mean;
  return {mean, std::sqrt(var / walks)};
}

// killed-walk visit counts: expected visits to `start` before the walk
// leaves the box (d = 3)
inline McEstimate mc_killed_visits_z3(const dgff::LatticeBox& box,
                                      const dgff::LatticePoint& start, std::uint64_t seed,
                                      std::int64_t walks, int threads) {
  const int blocks = 64;
  std::vector<double> sum(blocks, 0.0), sumsq(blocks, 0.0);
  dgff::parallel_for(blocks, threads, [&](std::int64_t blk) {
    DirectionSource dirs(dgff::splitmix64(seed ^ (0xfeedULL + blk)));
    const std::int64_t lo = walks * blk / blocks, hi = walks * (blk + 1) / blocks;
    double s = 0.0, s2 = 0.0;
    for (std::int64_t w = lo; w < hi; ++w) {
      int x = start[0], y = start[1], z = start[2];
      int visits = 1;
      for (;;) {
        switch (dirs.next_dir()) {
          case 0: ++x; break;
          case 1: --x; break;
          case 2: ++y; break;
          case 3: --y; break;
          case 4: ++z; break;
          default: --z; break;
        }
        if (x < 0 || x >= box.n || y < 0 || y >= box.n || z < 0 || z >= box.n) break;
        if (x == start[0] && y == start[1] && z == start[2]) ++visits;
      }
      s += visits;
      s2 += static_cast<double>(visits) * visits;
    }
    sum[blk] = s;
    sumsq[blk] = s2;
  });
  double s = 0.0, s2 = 0.0;
  for (int b = 0; b < blocks; ++b) {
    s += sum[b];
    s2 += sumsq[b];
  }
  const double mean = s / walks;
  const double var = s2 / walks - mean * mean;
  return {mean, std::sqrt(var / walks)};
}

// inversion sampler for Poisson(lambda); exact and portable
inline std::int64_t poisson_inverse(double lambda, double u) {
  double p = std::exp(-lambda), cdf = p;
  std::int64_t k = 0;
  while (u > cdf && k < 500) {
    ++k;
    p *= lambda / k;
    cdf += p;
  }
  return k;
}

inline double gumbel_draw(double u) { return -std::log(-std::log(u)); }

// Eq.-style normalizing constants recomputed in extended precision
struct ConstantsLD {
  long double b, a;
};
inline ConstantsLD constants_ld(std::int64_t N, long double g0) {
  const long double lN = std::log(static_cast<long double>(N));
  const long double root = std::sqrt(2.0L * lN);
  const long double pi = 3.14159265358979323846264338327950288L;
  const long double b =
      std::sqrt(g0) * (root - (std::log(lN) + std::log(4.0L * pi)) / (2.0L * root));
  return {b, g0 / b};
}

}  // namespace oracle
