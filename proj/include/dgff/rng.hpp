// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

namespace dgff {

/// Finalizing mixer from splitmix64; bijective on 64-bit words.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seeding contract for every random quantity in the toolkit.
///
/// Algorithm: std::mt19937_64 seeded with splitmix64-mixed words; Gaussians
/// by Box-Muller on 53-bit uniforms. Substreams for replication k use
/// seed XOR (k+1)*0x9e3779b97f4a7c15 before mixing, which is injective in k
/// for a fixed master seed. Identical (seed, stream) gives identical draws
/// regardless of thread count.
struct RngSpec {
  std::uint64_t master_seed = 1;
  std::string algorithm = "mt19937_64/box-muller/v1";

  RngSpec substream(std::uint64_t k) const {
    RngSpec s = *this;
    s.master_seed = splitmix64(master_seed ^ ((k + 1) * 0x9e3779b97f4a7c15ULL));
    return s;
  }
};

/// Deterministic N(0,1) stream. Box-Muller, pair-cached.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}
  explicit GaussianStream(const RngSpec& spec) : GaussianStream(spec.master_seed) {}

  /// Uniform on (0,1]; never returns 0 so log() is safe.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1p-53;
  }

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  template <class It>
  void fill(It first, It last) {
    for (; first != last; ++first) *first = next();
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace dgff
