// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace dgff {

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // unbiased
};

MeanVar mean_var(const std::vector<double>& xs);

/// One-sample Kolmogorov-Smirnov distance sup |F_emp - F|.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Regularized upper incomplete gamma Q(a, x); chi-square survival is
/// Q(df/2, stat/2).
double gammq(double a, double x);

double chi2_survival(double stat, int df);

double poisson_pmf(std::int64_t k, double lambda);

struct Chi2Result {
  double stat = 0.0;
  int df = 0;
  double p_value = 1.0;
  int bins = 0;
};

/// Goodness of fit of integer counts against Poisson(lambda); upper bins
/// merged until every expected count reaches min_expected.
Chi2Result chi2_poisson_gof(const std::vector<std::int64_t>& counts, double lambda,
                            double min_expected = 5.0);

}  // namespace dgff
