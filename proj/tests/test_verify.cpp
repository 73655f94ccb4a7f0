// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "dgff/normal.hpp"
#include "dgff/stats.hpp"
#include "dgff/verify.hpp"
#include "oracles.hpp"

using namespace dgff;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

std::shared_ptr<GreenTable> shared_green() {
  static auto g = std::make_shared<GreenTable>(3);
  return g;
}

}  // namespace

TEST_CASE("mills bracket: endpoints and tightening ratio") {
  CHECK_THROWS_AS(mills_bracket(0.0), std::invalid_argument);
  CHECK_THROWS_AS(mills_bracket(-1.0), std::invalid_argument);

  const auto at1 = mills_bracket(1.0);
  CHECK(at1.first == 0.0);  // the (1 - 1/t^2) factor vanishes

  const auto at2 = mills_bracket(2.0);
  CHECK(at2.first == doctest::Approx(0.020246612442).epsilon(1e-9));
  CHECK(at2.second == doctest::Approx(0.026995483257).epsilon(1e-9));
  CHECK(normal_upper_tail(2.0) == doctest::Approx(0.022750131948).epsilon(1e-9));
  CHECK(at2.first < normal_upper_tail(2.0));
  CHECK(normal_upper_tail(2.0) < at2.second);

  // upper/tail ratio decreases to 1 through t = 2, 4, 8
  double prev = kInf;
  for (double t : {2.0, 4.0, 8.0}) {
    const double ratio = mills_bracket(t).second / normal_upper_tail(t);
    CHECK(ratio > 1.0);
    CHECK(ratio < prev);
    prev = ratio;
  }

  // the bracket contains the implemented tail across the working range
  for (double t = 0.5; t <= 10.0; t += 0.125) {
    const auto [lo, hi] = mills_bracket(t);
    const double tail = normal_upper_tail(t);
    CHECK(lo <= tail);
    CHECK(tail <= hi);
  }
}

TEST_CASE("chi-square machinery: survival values and Poisson fit") {
  // known survival values: Q(df=1, 3.841) ~ 0.05, Q(df=2, 9.21) ~ 0.01
  CHECK(chi2_survival(3.841459, 1) == doctest::Approx(0.05).epsilon(1e-4));
  CHECK(chi2_survival(9.21034, 2) == doctest::Approx(0.01).epsilon(1e-4));
  CHECK(poisson_pmf(0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(poisson_pmf(3, 2.0) == doctest::Approx(std::exp(-2.0) * 8.0 / 6.0).epsilon(1e-13));
}

TEST_CASE("poisson_count_test: zero counts, synthetic fixture, rejection") {
  CHECK_THROWS_AS(poisson_count_test({}, cube_above(3, 0.0), TestMode::exact_finite_N, 0.0, 1),
                  std::invalid_argument);

  // all-zero counts against a zero oracle pass
  const std::vector<std::int64_t> zeros(200, 0);
  const auto rz = poisson_count_test(zeros, cube_above(3, 0.0), TestMode::exact_finite_N, 0.0, 1);
  CHECK(rz.verdict == "pass");

  // synthetic Poisson(1) draws pass the mean gate and the chi-square at 1%
  GaussianStream u(RngSpec{404});
  std::vector<std::int64_t> draws(10000);
  for (auto& k : draws) k = oracle::poisson_inverse(1.0, u.uniform());
  const auto r = poisson_count_test(draws, cube_above(3, 0.0), TestMode::exact_finite_N, 1.0, 404);
  CHECK(r.verdict == "pass");
  CHECK(r.extras.at("chi2").at("pass_at_0.01") == true);
  CHECK(r.extras.at("dispersion").get<double>() == doctest::Approx(1.0).epsilon(0.1));

  // a mean far off the oracle fails
  const auto bad = poisson_count_test(draws, cube_above(3, 0.0), TestMode::exact_finite_N, 2.0, 404);
  CHECK(bad.verdict == "fail");

  // limit mode only diagnoses
  const auto lim = poisson_count_test(draws, cube_above(3, 0.0), TestMode::limit, 1.0, 404);
  CHECK(lim.verdict == "diagnostic");
}

TEST_CASE("avoidance_test references: single rect and product rule") {
  // synthetic patterns on a tiny graph so the references have closed forms
  LatticeBox box(3, 4);
  const auto c = NormalizingConstants::from(box.site_count(), shared_green()->g0());
  auto graph = build_neighborhoods(box, {cube_above(3, 0.0)}, 0.1, RadiusRule::fixed(1));
  BernoulliSummary summary;
  summary.p.assign(box.site_count(), 0.01);
  summary.lambda = {0.64};
  summary.level_sets = {LevelSet{{0.0, kInf}}};

  std::vector<std::vector<std::int64_t>> rows(500, {0});
  for (int i = 0; i < 150; ++i) rows[i] = {1};
  const auto r = avoidance_test(rows, {cube_above(3, 0.0)}, graph, summary, 0.05, 9);
  CHECK(r.statistic == doctest::Approx(0.7));
  CHECK(r.reference == doctest::Approx(std::pow(0.99, 64)).epsilon(1e-12));
  CHECK(r.extras.at("poisson_product_ref").get<double>() ==
        doctest::Approx(std::exp(-0.64)).epsilon(1e-12));
  CHECK(r.extras.at("limit_ref").get<double>() == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  // two disjoint rectangles multiply the limit reference
  Rectangle left({{0.0, 0.5}, {0.0, 1.0}, {0.0, 1.0}}, LevelSet{{0.5, kInf}});
  Rectangle right({{0.5, 1.0}, {0.0, 1.0}, {0.0, 1.0}}, LevelSet{{-0.5, kInf}});
  auto graph2 = build_neighborhoods(box, {left, right}, 0.1, RadiusRule::fixed(1));
  BernoulliSummary s2;
  s2.p.assign(box.site_count(), 0.005);
  s2.lambda = {0.16, 0.16};
  s2.level_sets = {left.levels, right.levels};
  std::vector<std::vector<std::int64_t>> rows2(500, {0, 0});
  const auto r2 = avoidance_test(rows2, {left, right}, graph2, s2, 0.05, 9);
  const double want = std::exp(-(0.5 * std::exp(-0.5) + 0.5 * std::exp(0.5)));
  CHECK(r2.extras.at("limit_ref").get<double>() == doctest::Approx(want).epsilon(1e-12));

  CHECK_THROWS_AS(avoidance_test(rows, {left, left}, graph2, s2, 0.05, 9),
                  std::invalid_argument);
}

TEST_CASE("gumbel_test: true Gumbel samples sit within KS 0.02 at M = 10^4") {
  GaussianStream u(RngSpec{505});
  std::vector<double> draws(10000);
  for (auto& x : draws) x = oracle::gumbel_draw(u.uniform());
  const auto r = gumbel_test(draws, 505);
  CHECK(r.verdict == "diagnostic");
  CHECK(r.statistic < 0.02);
  CHECK(r.extras.at("gumbel_cdf_at_zero").get<double>() ==
        doctest::Approx(0.3678794411714).epsilon(1e-12));
}

TEST_CASE("empirical_tv: closed form for point mass at zero vs Poisson(1)") {
  std::vector<std::vector<std::int64_t>> zeros(2000, {0});
  const auto r = empirical_tv(zeros, {1.0}, 0.0, 1);
  CHECK(r.statistic == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("empirical_tv: self-test and the Poisson(1)-vs-Poisson(2) fixture") {
  GaussianStream u(RngSpec{606});
  std::vector<std::vector<std::int64_t>> draws(10000, std::vector<std::int64_t>(1));
  for (auto& v : draws) v[0] = oracle::poisson_inverse(1.0, u.uniform());
  const auto self = empirical_tv(draws, {1.0}, 0.0, 606);
  CHECK(self.statistic < 0.03);

  // exact TV between Poisson(1) and Poisson(2) by pmf summation
  double exact = 0.0;
  for (int k = 0; k < 60; ++k) exact += 0.5 * std::abs(poisson_pmf(k, 1.0) - poisson_pmf(k, 2.0));
  CHECK(exact == doctest::Approx(0.3297530326).epsilon(1e-8));
  const auto cross = empirical_tv(draws, {2.0}, exact, 606);
  CHECK(std::abs(cross.statistic - exact) < 0.04);

  // gates
  CHECK_THROWS_AS(empirical_tv(draws, {}, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(empirical_tv(draws, {11.0}, 0.0, 1), std::invalid_argument);
  std::vector<std::vector<std::int64_t>> few(10, {0});
  CHECK_THROWS_AS(empirical_tv(few, {1.0}, 0.0, 1), std::invalid_argument);
}

TEST_CASE("markov property test passes at the 10-box") {
  FieldSampler sampler(shared_green());
  LatticeBox box(3, 10);
  const auto r = markov_property_test(sampler, box, {5, 5, 5}, 3, 2000, RngSpec{707}, 2);
  CHECK(r.verdict == "pass");
  CHECK(r.M == 2000);
  // residual variance should be close to the inner-ball value, far from the
  // unconditioned one
  const double full_var = BoxKernel(box).entry({5, 5, 5}, {5, 5, 5});
  CHECK(r.reference < full_var);

  // geometry violations
  CHECK_THROWS_AS(markov_property_test(sampler, box, {1, 5, 5}, 3, 2000, RngSpec{707}, 2),
                  std::invalid_argument);
}

TEST_CASE("markov property: empty conditioning means full variance") {
  // radius larger than the box leaves no conditioning sites; the residual
  // is the field itself and its variance is the unconditioned g_N(alpha)
  LatticeBox box(3, 5);
  std::vector<std::int64_t> cond;  // empty
  CHECK(conditional_mean(box, {2, 2, 2}, cond, {}) == 0.0);
}

TEST_CASE("report JSON is deterministic for identical inputs") {
  GaussianStream u(RngSpec{808});
  std::vector<double> draws(500);
  for (auto& x : draws) x = oracle::gumbel_draw(u.uniform());
  const auto a = gumbel_test(draws, 808).to_json().dump();
  const auto b = gumbel_test(draws, 808).to_json().dump();
  CHECK(a == b);
}
