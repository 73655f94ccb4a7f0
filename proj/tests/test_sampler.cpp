// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "dgff/box_kernel.hpp"
#include "dgff/sampler.hpp"
#include "dgff/steinchen.hpp"
#include "oracles.hpp"

using namespace dgff;

namespace {

std::shared_ptr<GreenTable> shared_green() {
  static auto g = std::make_shared<GreenTable>(3);
  return g;
}

FieldSampler& sampler() {
  static FieldSampler s(shared_green());
  return s;
}

}  // namespace

TEST_CASE("identical seeds give bit-identical samples for every method") {
  LatticeBox box(3, 6);
  RngSpec rng{31337};
  CHECK(sampler().zero_boundary(box, rng).values == sampler().zero_boundary(box, rng).values);
  CHECK(sampler().infinite_exact(box, rng).values == sampler().infinite_exact(box, rng).values);
  CHECK(sampler().infinite_enlarged(box, rng).values ==
        sampler().infinite_enlarged(box, rng).values);
  // different substreams differ
  CHECK(sampler().zero_boundary(box, rng.substream(0)).values !=
        sampler().zero_boundary(box, rng.substream(1)).values);
}

TEST_CASE("spectral kernel matches the sparse solver on box Green values") {
  LatticeBox box(3, 6);
  BoxKernel kernel(box);
  const LatticePoint beta{3, 2, 1};
  const auto col = shared_green()->finite_column(box, beta);
  for (const LatticePoint& alpha :
       {LatticePoint{3, 2, 1}, LatticePoint{0, 0, 0}, LatticePoint{5, 2, 3}}) {
    CHECK(kernel.entry(alpha, beta) == doctest::Approx(col[box.index_of(alpha)]).epsilon(1e-10));
  }
  const auto diag = kernel.diagonal();
  CHECK(diag[box.index_of(beta)] == doctest::Approx(col[box.index_of(beta)]).epsilon(1e-10));
}

TEST_CASE("zero-boundary variances: corner below center, both match the solver") {
  LatticeBox box(3, 8);
  const std::int64_t center = box.index_of({4, 4, 4});
  const std::int64_t corner = box.index_of({0, 0, 0});
  BoxKernel kernel(box);
  const auto diag = kernel.diagonal();

  const int M = 6000;
  RngSpec rng{11};
  double sc = 0, sc2 = 0, so = 0, so2 = 0;
  for (int r = 0; r < M; ++r) {
    const FieldSample f = sampler().zero_boundary(box, rng.substream(r));
    sc += f.values[center];
    sc2 += f.values[center] * f.values[center];
    so += f.values[corner];
    so2 += f.values[corner] * f.values[corner];
  }
  const double vc = sc2 / M - (sc / M) * (sc / M);
  const double vo = so2 / M - (so / M) * (so / M);
  const double se_c = vc * std::sqrt(2.0 / M), se_o = vo * std::sqrt(2.0 / M);
  CHECK(std::abs(vc - diag[center]) < 4.0 * se_c);
  CHECK(std::abs(vo - diag[corner]) < 4.0 * se_o);
  CHECK(vo < vc);
  CHECK(diag[corner] < diag[center]);
  // stochastic domination by the infinite-volume variance, exact on oracles
  for (double v : diag) CHECK(v <= shared_green()->g0());
}

TEST_CASE("exact infinite-volume sampler reproduces g(0) and g(e1)") {
  LatticeBox box(3, 5);
  const std::int64_t i0 = box.index_of({2, 2, 2});
  const std::int64_t i1 = box.index_of({2, 2, 3});
  const int M = 8000;
  RngSpec rng{12};
  double s0 = 0, s00 = 0, s1 = 0, s01 = 0;
  for (int r = 0; r < M; ++r) {
    const FieldSample f = sampler().infinite_exact(box, rng.substream(r));
    CHECK(f.bias_bound == 0.0);
    s0 += f.values[i0];
    s1 += f.values[i1];
    s00 += f.values[i0] * f.values[i0];
    s01 += f.values[i0] * f.values[i1];
  }
  const double var = s00 / M - (s0 / M) * (s0 / M);
  const double cov = s01 / M - (s0 / M) * (s1 / M);
  const double g0 = shared_green()->g0();
  CHECK(std::abs(var - g0) < 4.0 * g0 * std::sqrt(2.0 / M));
  CHECK(std::abs(cov - shared_green()->infinite({1, 0, 0})) < 4.0 * g0 * std::sqrt(2.0 / M));
}

TEST_CASE("enlarged-box and exact methods agree within bias bound plus noise") {
  LatticeBox box(3, 5);
  const std::int64_t i0 = box.index_of({2, 2, 2});
  const std::int64_t i1 = box.index_of({2, 2, 3});
  const int M = 8000;
  RngSpec rng{13};
  double s0 = 0, s1 = 0, s01 = 0;
  double bias = 0;
  for (int r = 0; r < M; ++r) {
    const FieldSample f = sampler().infinite_enlarged(box, rng.substream(r), 4.0);
    bias = f.bias_bound;
    s0 += f.values[i0];
    s1 += f.values[i1];
    s01 += f.values[i0] * f.values[i1];
  }
  CHECK(bias > 0.0);
  const double cov = s01 / M - (s0 / M) * (s1 / M);
  const double mc_se = 2.0 * std::sqrt(2.0 / M);
  CHECK(std::abs(cov - shared_green()->infinite({1, 0, 0})) < bias + 4.0 * mc_se);
}

TEST_CASE("enlarged window law matches the actual enlarged-box covariance") {
  LatticeBox box(3, 5);
  EnlargedWindowLaw law(box, sampler().enlarged_side(box, 4.0));
  const std::int64_t i0 = box.index_of({2, 2, 2});
  const int M = 8000;
  RngSpec rng{14};
  double s = 0, s2 = 0;
  for (int r = 0; r < M; ++r) {
    const FieldSample f = sampler().infinite_enlarged(box, rng.substream(r), 4.0);
    s += f.values[i0];
    s2 += f.values[i0] * f.values[i0];
  }
  const double var = s2 / M - (s / M) * (s / M);
  const double want = law.sigma(i0) * law.sigma(i0);
  CHECK(std::abs(var - want) < 4.0 * want * std::sqrt(2.0 / M));
}

TEST_CASE("dense sampler enforces the cap; enlarged enforces margin >= 2") {
  FieldSampler tight(shared_green(), SamplerConfig{100, 4.0, 1.0});
  CHECK_THROWS_WITH_AS(tight.infinite_exact(LatticeBox(3, 8), RngSpec{1}),
                       doctest::Contains("enlarged"), std::runtime_error);
  CHECK_THROWS_AS(sampler().infinite_enlarged(LatticeBox(3, 8), RngSpec{1}, 1.5),
                  std::invalid_argument);
}

TEST_CASE("conditional mean: empty set, containment errors") {
  LatticeBox box(3, 6);
  CHECK(conditional_mean(box, {3, 3, 3}, {}, {}) == 0.0);
  const std::int64_t beta = box.index_of({2, 2, 2});
  CHECK_THROWS_AS(conditional_mean(box, {2, 2, 2}, {beta}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(hitting_probabilities(box, {6, 0, 0}, {beta}), std::invalid_argument);
}

TEST_CASE("single-site conditioning: hitting probability is g_V(a,b)/g_V(b,b)") {
  LatticeBox box(3, 7);
  const LatticePoint alpha{1, 3, 3}, beta{5, 3, 3};
  const auto h = hitting_probabilities(box, alpha, {box.index_of(beta)});
  REQUIRE(h.size() == 1);
  const auto col = shared_green()->finite_column(box, beta);
  CHECK(h[0] ==
        doctest::Approx(col[box.index_of(alpha)] / col[box.index_of(beta)]).epsilon(1e-9));
  CHECK(h[0] >= 0.0);
  CHECK(h[0] <= 1.0);
  // on growing boxes the same ratio approaches g(a-b)/g(0)
  LatticeBox big(3, 31);
  const LatticePoint a2{13, 15, 15}, b2{17, 15, 15};
  const auto h2 = hitting_probabilities(big, a2, {big.index_of(b2)});
  const double limit = shared_green()->infinite({4, 0, 0}) / shared_green()->g0();
  CHECK(std::abs(h2[0] - limit) < 0.02);
  CHECK(h2[0] < limit);  // killing outside the box only removes mass
}

TEST_CASE("hitting probabilities from an annulus sum to at most one") {
  LatticeBox box(3, 9);
  const LatticePoint alpha{4, 4, 4};
  std::vector<std::int64_t> cond;
  for (std::int64_t idx = 0; idx < box.site_count(); ++idx)
    if (linf_norm(sub(box.point_at(idx), alpha)) >= 3) cond.push_back(idx);
  const auto h = hitting_probabilities(box, alpha, cond);
  double total = 0.0;
  for (double v : h) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    total += v;
  }
  CHECK(total <= 1.0 + 1e-12);
  CHECK(total > 0.9);  // walk from the center almost surely reaches the shell

  // kernel application equals the direct operation
  std::vector<double> vals(cond.size());
  for (std::size_t j = 0; j < cond.size(); ++j) vals[j] = std::sin(0.1 * j);
  ConditionalMeanKernel kernel(box, alpha, cond);
  CHECK(kernel.apply(vals) == doctest::Approx(conditional_mean(box, alpha, cond, vals)));
}

TEST_CASE("annulus conditioning: residual variance matches the inner-ball solve") {
  LatticeBox box(3, 8);
  const LatticePoint alpha{4, 4, 4};
  std::vector<std::int64_t> cond;
  for (std::int64_t idx = 0; idx < box.site_count(); ++idx)
    if (linf_norm(sub(box.point_at(idx), alpha)) >= 3) cond.push_back(idx);
  ConditionalMeanKernel kernel(box, alpha, cond);

  LatticeBox ball(3, 5);
  const LatticePoint center{2, 2, 2};
  const double oracle = shared_green()->finite_column(ball, center)[ball.index_of(center)];

  const int M = 6000;
  RngSpec rng{15};
  double s = 0, s2 = 0;
  for (int r = 0; r < M; ++r) {
    const FieldSample f = sampler().zero_boundary(box, rng.substream(r));
    const double resid = f.values[box.index_of(alpha)] - kernel.apply_field(f.values);
    s += resid;
    s2 += resid * resid;
  }
  const double var = s2 / M - (s / M) * (s / M);
  CHECK(std::abs(var - oracle) < 4.0 * var * std::sqrt(2.0 / M));
}
