// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dgff/box_kernel.hpp"
#include "dgff/extremes.hpp"
#include "dgff/green.hpp"
#include "dgff/lattice.hpp"

namespace dgff {

/// Dependence-neighborhood radius. Both paper presets evaluate to
/// (log N)^{2+2eps}; they are kept separate for report provenance.
struct RadiusRule {
  enum class Kind { paper, paper_bulk, fixed };
  Kind kind = Kind::fixed;
  double fixed_radius = 2.0;

  static RadiusRule paper() { return {Kind::paper, 0.0}; }
  static RadiusRule paper_bulk() { return {Kind::paper_bulk, 0.0}; }
  static RadiusRule fixed(double r) { return {Kind::fixed, r}; }

  double radius(std::int64_t N, double epsilon) const;
  std::string label() const;
};

/// Index sets I_j = nA_j ∩ V (or ∩ bulk) and the implicit l-infinity
/// dependence balls B_alpha of the resolved radius.
struct DependencyGraph {
  LatticeBox box;
  PatternSource source = PatternSource::full_box;
  double delta = 0.0;
  double epsilon = 0.1;
  RadiusRule rule;
  double radius = 0.0;  // resolved value of the rule

  std::vector<std::vector<std::int64_t>> parts;  // I_j, ascending site indices
  std::vector<int> part_of;                      // flat site -> part, -1 outside I
  std::int64_t member_count = 0;

  int ball_radius() const { return static_cast<int>(radius); }
  /// true when B_alpha = I for every alpha (radius covers the diameter of I).
  bool full_cover() const;
};

DependencyGraph build_neighborhoods(const LatticeBox& box, const std::vector<Rectangle>& rects,
                                    double epsilon, RadiusRule rule,
                                    PatternSource source = PatternSource::full_box,
                                    double delta = 0.25);

/// Marginals p_alpha = P((value - b_N)/a_N in R_j) for a site of std dev
/// sigma, and their per-part sums lambda_j.
double marginal_p(double sigma, const NormalizingConstants& consts, const LevelSet& levels);

struct BernoulliSummary {
  std::vector<double> p;          // flat site index -> p_alpha (0 outside I)
  std::vector<double> lambda;     // per part
  std::vector<LevelSet> level_sets;
  double lambda_min() const;
  double total() const;
};

/// Per-site laws used by the b2 pair sums.
class PairLaw {
 public:
  virtual ~PairLaw() = default;
  virtual double sigma(std::int64_t site) const = 0;
  virtual double correlation(std::int64_t site_a, std::int64_t site_b) const = 0;
};

/// Stationary law of the infinite-volume field: sigma^2 = g(0),
/// rho = g(a-b)/g(0).
class InfiniteVolumeLaw : public PairLaw {
 public:
  InfiniteVolumeLaw(const LatticeBox& box, std::shared_ptr<const GreenTable> green);
  double sigma(std::int64_t site) const override;
  double correlation(std::int64_t a, std::int64_t b) const override;

 private:
  LatticeBox box_;
  std::shared_ptr<const GreenTable> green_;
  double sigma0_;
};

/// Zero-boundary law on the box, through the spectral kernel.
class FiniteVolumeLaw : public PairLaw {
 public:
  explicit FiniteVolumeLaw(const LatticeBox& box);
  double sigma(std::int64_t site) const override;
  double correlation(std::int64_t a, std::int64_t b) const override;

 private:
  LatticeBox box_;
  BoxKernel kernel_;
  std::vector<double> diag_;
  mutable std::mutex memo_mu_;
  mutable std::map<std::vector<int>, double> memo_;  // symmetry-orbit cache
};

/// Law of the enlarged-box sampler's output: the zero-boundary field of the
/// big box restricted to the centered window. Sites index the window.
class EnlargedWindowLaw : public PairLaw {
 public:
  EnlargedWindowLaw(const LatticeBox& window, int big_side);
  double sigma(std::int64_t site) const override;
  double correlation(std::int64_t a, std::int64_t b) const override;

 private:
  LatticeBox window_, big_;
  int start_;
  BoxKernel kernel_;
  std::vector<double> diag_;
  mutable std::mutex memo_mu_;
  mutable std::map<std::vector<int>, double> memo_;

  LatticePoint shifted(std::int64_t window_site) const;
};

BernoulliSummary marginal_summary(const DependencyGraph& graph, const PairLaw& law,
                                  const NormalizingConstants& consts,
                                  const std::vector<LevelSet>& level_sets);

/// b1 = sum_alpha sum_{beta in B_alpha} p_alpha p_beta (diagonal included).
double compute_b1(const DependencyGraph& graph, const BernoulliSummary& summary);

/// Exact bivariate Gaussian upper tail P(Z1 > t1, Z2 > t2) at correlation
/// rho, by one-dimensional quadrature of the conditioned tail.
double bivariate_upper_tail(double rho, double t1, double t2);

/// P(Z1 > t, Z2 > t); the b2 kernel.
double joint_tail(double rho, double t);

struct B2Result {
  double numeric = 0.0;
  double analytic = 0.0;
  std::int64_t ordered_pairs = 0;
};

/// b2 = sum_alpha sum_{beta != alpha in B_alpha} E[X_alpha X_beta]: exact
/// numeric value through bivariate tails, plus the closed-form bound
/// (2-kappa)^{3/2} kappa^{-1/2} N^{-2/(2-kappa)} max{e^{-2z} 1_{z<=0},
/// e^{-2z/(2-kappa)} 1_{z>0}} per pair.
B2Result compute_b2(const DependencyGraph& graph, const BernoulliSummary& summary,
                    const PairLaw& law, const NormalizingConstants& consts, double z,
                    double kappa);

struct B3Certificate {
  double sup_green = 0.0;   // max_alpha sup_{beta in I \ B_alpha} g(alpha - beta)
  double var_bound = 0.0;   // variance bound for the conditional drift
  double tail_bound = 0.0;  // summed Gaussian tail at threshold u_N(z)^{-1-eps}
};

B3Certificate b3_certificate(const DependencyGraph& graph, const GreenTable& green,
                             const NormalizingConstants& consts, double z, double epsilon);

/// 2 min{1, 1.4 lambda_min^{-1/2}} (2 b1 + 2 b2 + b3).
double tv_bound(double b1, double b2, double b3_used, double lambda_min);

enum class B3Policy { zero, certificate };

struct SteinChenReport {
  int d = 3;
  int n = 0;
  std::string source;
  double delta = 0.0;
  double z = 0.0;
  double epsilon = 0.0;
  std::string radius_rule;
  double radius = 0.0;
  double g0 = 0.0;
  std::vector<double> lambda;
  double lambda_min = 0.0;
  double b1 = 0.0;
  double b2_numeric = 0.0;
  double b2_analytic = 0.0;
  std::int64_t b2_pairs = 0;
  B3Certificate b3;
  std::string b3_policy;
  double b3_used = 0.0;
  double tv = 0.0;

  nlohmann::json to_json() const;
};

SteinChenReport make_report(const DependencyGraph& graph, const BernoulliSummary& summary,
                            const PairLaw& law, const GreenTable& green,
                            const NormalizingConstants& consts, double z, B3Policy policy);

}  // namespace dgff
