// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0

#include "dgff/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dgff {

MeanVar mean_var(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean_var: empty sample");
  double m = 0.0;
  for (double x : xs) m += x;
  m /= xs.size();
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  if (xs.size() > 1) v /= xs.size() - 1;
  return {m, v};
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - i / n));
    d = std::max(d, std::abs((i + 1) / n - f));
  }
  return d;
}

namespace {

// series expansion of P(a,x), valid for x < a + 1
double gamma_series_p(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a,x), valid for x >= a + 1
double gamma_cf_q(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gammq(double a, double x) {
  if (a <= 0 || x < 0) throw std::invalid_argument("gammq: need a > 0, x >= 0");
  if (x == 0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_series_p(a, x);
  return gamma_cf_q(a, x);
}

double chi2_survival(double stat, int df) {
  if (df <= 0) throw std::invalid_argument("chi2_survival: df must be positive");
  return gammq(0.5 * df, 0.5 * stat);
}

double poisson_pmf(std::int64_t k, double lambda) {
  if (k < 0) return 0.0;
  if (lambda == 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(k * std::log(lambda) - lambda - std::lgamma(static_cast<double>(k) + 1.0));
}

Chi2Result chi2_poisson_gof(const std::vector<std::int64_t>& counts, double lambda,
                            double min_expected) {
  if (counts.empty()) throw std::invalid_argument("chi2_poisson_gof: empty sample");
  const double M = static_cast<double>(counts.size());
  std::int64_t kmax = 0;
  for (std::int64_t c : counts) kmax = std::max(kmax, c);

  // bins 0..kmax plus an overflow tail; merge upper bins until each
  // expected count clears min_expected
  std::vector<double> expected;
  std::vector<double> observed;
  double cum_p = 0.0;
  for (std::int64_t k = 0; k <= kmax; ++k) {
    const double pk = poisson_pmf(k, lambda);
    cum_p += pk;
    expected.push_back(M * pk);
    double obs = 0.0;
    for (std::int64_t c : counts) obs += (c == k);
    observed.push_back(obs);
  }
  expected.push_back(M * std::max(0.0, 1.0 - cum_p));
  observed.push_back(0.0);

  // merge from the right
  while (expected.size() > 2 && expected.back() < min_expected) {
    expected[expected.size() - 2] += expected.back();
    observed[observed.size() - 2] += observed.back();
    expected.pop_back();
    observed.pop_back();
  }
  // merge from the left
  while (expected.size() > 2 && expected.front() < min_expected) {
    expected[1] += expected[0];
    observed[1] += observed[0];
    expected.erase(expected.begin());
    observed.erase(observed.begin());
  }

  Chi2Result r;
  r.bins = static_cast<int>(expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected[i] <= 0) continue;
    const double diff = observed[i] - expected[i];
    r.stat += diff * diff / expected[i];
  }
  r.df = std::max(1, r.bins - 1);
  r.p_value = chi2_survival(r.stat, r.df);
  return r;
}

}  // namespace dgff
