// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dgff/extremes.hpp"
#include "dgff/sampler.hpp"
#include "dgff/steinchen.hpp"

namespace dgff {

/// Outcome of one statistical check. Hard (exact_finite_N) tests carry a
/// pass/fail verdict at the declared tolerance; limit-mode tests only
/// report diagnostics.
struct TestReport {
  std::string test;
  std::string mode;  // "exact_finite_N" | "limit" | "self_test"
  std::string verdict = "diagnostic";
  std::int64_t M = 0;
  std::uint64_t master_seed = 0;
  double statistic = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  nlohmann::json extras = nlohmann::json::object();

  bool failed() const { return verdict == "fail"; }
  nlohmann::json to_json() const;
};

enum class TestMode { exact_finite_N, limit };

/// Mills bracket for the standard normal upper tail, t > 0:
/// (1 - t^-2) phi(t)/t <= Phi-bar(t) <= phi(t)/t.
std::pair<double, double> mills_bracket(double t);

/// Mean count against an oracle: hard 4-SE gate in exact mode, diagnostic
/// against the limit mass in limit mode. Dispersion ratio and a chi-square
/// Poisson goodness-of-fit at significance 0.01 ride along in extras.
TestReport poisson_count_test(const std::vector<std::int64_t>& counts, const Rectangle& rect,
                              TestMode mode, double oracle_mean, std::uint64_t master_seed);

/// Frequency of {all rectangle counts zero} against the independent
/// Bernoulli product, with the Stein-Chen bound plus the exact
/// Poisson-vs-Bernoulli product gap as the certified discrepancy radius.
/// The exponential limit reference is reported as a diagnostic.
/// counts_per_rep holds one row per replication, one column per rectangle.
TestReport avoidance_test(const std::vector<std::vector<std::int64_t>>& counts_per_rep,
                          const std::vector<Rectangle>& rects, const DependencyGraph& graph,
                          const BernoulliSummary& summary, double stein_chen_tv,
                          std::uint64_t master_seed);

/// Convenience overload counting the patterns directly.
TestReport avoidance_test(const std::vector<PointPattern>& patterns,
                          const std::vector<Rectangle>& rects, const DependencyGraph& graph,
                          const BernoulliSummary& summary, double stein_chen_tv,
                          std::uint64_t master_seed);

/// Kolmogorov-Smirnov distance of rescaled maxima to exp(-e^{-z});
/// diagnostic only (the paper gives no rate).
TestReport gumbel_test(const std::vector<double>& max_samples, std::uint64_t master_seed);

/// Plug-in total variation between empirical count vectors and the product
/// Poisson law; k <= 3 and lambda_j <= 10 keep the support manageable.
TestReport empirical_tv(const std::vector<std::vector<std::int64_t>>& count_vectors,
                        const std::vector<double>& lambdas, double tv_reference,
                        std::uint64_t master_seed);

/// Conditional-mean check: over M zero-boundary samples, the residual at
/// alpha given the field at l-infinity distance >= conditioning_radius has
/// variance g_U(alpha) (U the inner ball) and is uncorrelated with the
/// conditioning values.
TestReport markov_property_test(const FieldSampler& sampler, const LatticeBox& box,
                                const LatticePoint& alpha, int conditioning_radius,
                                std::int64_t M, const RngSpec& rng, int threads = 1);

}  // namespace dgff
