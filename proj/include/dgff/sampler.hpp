// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dgff/green.hpp"
#include "dgff/lattice.hpp"
#include "dgff/rng.hpp"

namespace dgff {

enum class FieldKind { zero_boundary, infinite_volume };
enum class SampleMethod { factorization, enlarged_box };

std::string to_string(FieldKind k);
std::string to_string(SampleMethod m);

/// One field realization on a box, lexicographic site order.
///
/// Reproducibility contract: identical (box, kind, method, seed) give
/// bit-identical values, independent of thread count.
struct FieldSample {
  LatticeBox box;
  FieldKind kind = FieldKind::zero_boundary;
  SampleMethod method = SampleMethod::factorization;
  std::uint64_t seed = 0;
  double bias_bound = 0.0;  // covariance approximation error; 0 for exact methods
  std::vector<double> values;
};

struct SamplerConfig {
  std::int64_t dense_cap = 4096;  // site limit for the dense covariance method
  double margin_factor = 4.0;     // default enlargement for infinite-volume sampling
  double c_d = 1.0;               // constant in the enlarged-box bias bound
};

/// Field generator; caches spectra, dense factors and transform plans.
/// Sampling is a pure function of (box, kind, method, seed); replications
/// should use RngSpec::substream per replication index.
class FieldSampler {
 public:
  explicit FieldSampler(std::shared_ptr<const GreenTable> green, SamplerConfig cfg = {});
  ~FieldSampler();

  const SamplerConfig& config() const { return cfg_; }
  const GreenTable& green() const { return *green_; }

  /// Exact zero-boundary field: spectral factorization of Q = I - P in the
  /// sine eigenbasis, covariance g_V.
  FieldSample zero_boundary(const LatticeBox& box, const RngSpec& rng) const;

  /// Exact infinite-volume restriction via dense Cholesky of [g(a-b)];
  /// rejects boxes above the dense cap.
  FieldSample infinite_exact(const LatticeBox& box, const RngSpec& rng) const;

  /// Zero-boundary sample on an enlarged box restricted to the centered
  /// window; bias_bound = C_d ((m-n)/2)^{2-d}. The enlarged side may be
  /// rounded up so the transform size factors nicely.
  FieldSample infinite_enlarged(const LatticeBox& box, const RngSpec& rng,
                                double margin_factor = 0.0) const;

  /// Dense method when the box fits under the cap, enlarged-box otherwise.
  FieldSample infinite_volume(const LatticeBox& box, const RngSpec& rng) const;

  /// Side actually used by infinite_enlarged for this box.
  int enlarged_side(const LatticeBox& box, double margin_factor = 0.0) const;

 private:
  std::shared_ptr<const GreenTable> green_;
  SamplerConfig cfg_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// P_alpha(S_H = beta) for every beta in the conditioning set: the walk is
/// killed outside the box, H is the hitting time of the set. Entries lie in
/// [0,1] and sum to at most 1.
std::vector<double> hitting_probabilities(const LatticeBox& box, const LatticePoint& alpha,
                                          const std::vector<std::int64_t>& conditioning,
                                          const SolverSpec& solver = {});

/// Conditional mean of the field at alpha given values on the conditioning
/// set (discrete Dirichlet problem; zero boundary outside the box).
double conditional_mean(const LatticeBox& box, const LatticePoint& alpha,
                        const std::vector<std::int64_t>& conditioning,
                        const std::vector<double>& boundary_values,
                        const SolverSpec& solver = {});

/// Reusable geometry for repeated conditional means at fixed (box, alpha,
/// conditioning set).
class ConditionalMeanKernel {
 public:
  ConditionalMeanKernel(const LatticeBox& box, const LatticePoint& alpha,
                        std::vector<std::int64_t> conditioning, const SolverSpec& solver = {});

  const std::vector<std::int64_t>& conditioning() const { return conditioning_; }
  const std::vector<double>& weights() const { return weights_; }

  /// boundary_values aligned with conditioning().
  double apply(const std::vector<double>& boundary_values) const;

  /// Convenience: pick conditioning values out of a full field.
  double apply_field(const std::vector<double>& field_values) const;

 private:
  std::vector<std::int64_t> conditioning_;
  std::vector<double> weights_;  // hitting probabilities
};

}  // namespace dgff
