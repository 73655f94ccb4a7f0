// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0

#include "dgff/steinchen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

#include "dgff/normal.hpp"
#include "dgff/quadrature.hpp"

namespace dgff {

double RadiusRule::radius(std::int64_t N, double epsilon) const {
  switch (kind) {
    case Kind::paper:
      return std::pow(std::log(static_cast<double>(N)), 2.0 + 2.0 * epsilon);
    case Kind::paper_bulk:
      return std::pow(std::log(static_cast<double>(N)), 2.0 * (1.0 + epsilon));
    case Kind::fixed:
      return fixed_radius;
  }
  return fixed_radius;
}

std::string RadiusRule::label() const {
  switch (kind) {
    case Kind::paper:
      return "paper";
    case Kind::paper_bulk:
      return "paper-bulk";
    case Kind::fixed: {
      std::ostringstream os;
      os << "fixed:" << fixed_radius;
      return os.str();
    }
  }
  return "fixed";
}

bool DependencyGraph::full_cover() const {
  // diameter of I in l-infinity; I is a union of boxes, so the coordinate
  // ranges give it exactly
  int lo = box.n, hi = -1;
  for (const auto& part : parts) {
    for (std::int64_t idx : part) {
      const LatticePoint p = box.point_at(idx);
      for (int c : p) {
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
    }
  }
  if (hi < lo) return true;  // empty I
  return radius >= hi - lo;
}

DependencyGraph build_neighborhoods(const LatticeBox& box, const std::vector<Rectangle>& rects,
                                    double epsilon, RadiusRule rule, PatternSource source,
                                    double delta) {
  if (epsilon <= 0) throw std::invalid_argument("build_neighborhoods: epsilon must be positive");
  for (std::size_t i = 0; i < rects.size(); ++i)
    for (std::size_t j = i + 1; j < rects.size(); ++j)
      if (!rects[i].spatially_disjoint(rects[j]))
        throw std::invalid_argument("build_neighborhoods: rectangles overlap");

  DependencyGraph g;
  g.box = box;
  g.source = source;
  g.delta = source == PatternSource::bulk ? delta : 0.0;
  g.epsilon = epsilon;
  g.rule = rule;
  g.radius = rule.radius(box.site_count(), epsilon);
  g.parts.assign(rects.size(), {});
  g.part_of.assign(box.site_count(), -1);

  std::vector<std::int64_t> sites;
  if (source == PatternSource::bulk) {
    sites = bulk_sites(box, delta);
  } else {
    sites.resize(box.site_count());
    for (std::int64_t i = 0; i < box.site_count(); ++i) sites[i] = i;
  }

  std::vector<double> loc(box.d);
  for (std::int64_t idx : sites) {
    const LatticePoint p = box.point_at(idx);
    for (int i = 0; i < box.d; ++i) loc[i] = static_cast<double>(p[i]) / box.n;
    for (std::size_t j = 0; j < rects.size(); ++j) {
      if (rects[j].contains_location(loc.data(), box.d)) {
        g.parts[j].push_back(idx);
        g.part_of[idx] = static_cast<int>(j);
        ++g.member_count;
        break;  // rectangles are disjoint
      }
    }
  }
  return g;
}

double marginal_p(double sigma, const NormalizingConstants& consts, const LevelSet& levels) {
  if (sigma <= 0) throw std::invalid_argument("marginal_p: sigma must be positive");
  double p = 0.0;
  for (const auto& [x, y] : levels.intervals) {
    const double upper = std::isinf(y) ? 0.0 : normal_upper_tail(consts.threshold(y) / sigma);
    p += normal_upper_tail(consts.threshold(x) / sigma) - upper;
  }
  return p;
}

double BernoulliSummary::lambda_min() const {
  double m = std::numeric_limits<double>::infinity();
  for (double l : lambda) m = std::min(m, l);
  return m;
}

double BernoulliSummary::total() const {
  double t = 0.0;
  for (double l : lambda) t += l;
  return t;
}

InfiniteVolumeLaw::InfiniteVolumeLaw(const LatticeBox& box,
                                     std::shared_ptr<const GreenTable> green)
    : box_(box), green_(std::move(green)), sigma0_(std::sqrt(green_->g0())) {
  green_->ensure_cube(box.n - 1);
}

double InfiniteVolumeLaw::sigma(std::int64_t) const { return sigma0_; }

double InfiniteVolumeLaw::correlation(std::int64_t a, std::int64_t b) const {
  return green_->infinite(sub(box_.point_at(a), box_.point_at(b))) / green_->g0();
}

namespace {

// canonical key of an unordered point pair under the cube symmetries: each
// axis pair folds by the reflection c -> n-1-c and orders internally
// (the per-axis spectral factor is symmetric), then axes sort
std::vector<int> box_pair_key(const LatticePoint& a, const LatticePoint& b, int n) {
  const int d = static_cast<int>(a.size());
  std::vector<std::pair<int, int>> axes(d);
  for (int i = 0; i < d; ++i) {
    const int lo = std::min(a[i], b[i]), hi = std::max(a[i], b[i]);
    const std::pair<int, int> direct{lo, hi}, mirrored{n - 1 - hi, n - 1 - lo};
    axes[i] = std::min(direct, mirrored);
  }
  std::sort(axes.begin(), axes.end());
  std::vector<int> key;
  key.reserve(2 * d);
  for (const auto& [x, y] : axes) {
    key.push_back(x);
    key.push_back(y);
  }
  return key;
}

}  // namespace

FiniteVolumeLaw::FiniteVolumeLaw(const LatticeBox& box)
    : box_(box), kernel_(box), diag_(kernel_.diagonal()) {}

double FiniteVolumeLaw::sigma(std::int64_t site) const { return std::sqrt(diag_[site]); }

double FiniteVolumeLaw::correlation(std::int64_t a, std::int64_t b) const {
  const LatticePoint pa = box_.point_at(a), pb = box_.point_at(b);
  const std::vector<int> key = box_pair_key(pa, pb, box_.n);
  {
    std::lock_guard<std::mutex> lock(memo_mu_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second / std::sqrt(diag_[a] * diag_[b]);
  }
  const double cov = kernel_.entry(pa, pb);
  std::lock_guard<std::mutex> lock(memo_mu_);
  memo_.emplace(key, cov);
  return cov / std::sqrt(diag_[a] * diag_[b]);
}

EnlargedWindowLaw::EnlargedWindowLaw(const LatticeBox& window, int big_side)
    : window_(window),
      big_(window.d, big_side),
      start_((big_side - window.n) / 2),
      kernel_(big_),
      diag_(kernel_.window_diagonal(start_, window.n)) {
  if (big_side < window.n)
    throw std::invalid_argument("EnlargedWindowLaw: big box smaller than the window");
}

LatticePoint EnlargedWindowLaw::shifted(std::int64_t window_site) const {
  LatticePoint p = window_.point_at(window_site);
  for (int& c : p) c += start_;
  return p;
}

double EnlargedWindowLaw::sigma(std::int64_t site) const { return std::sqrt(diag_[site]); }

double EnlargedWindowLaw::correlation(std::int64_t a, std::int64_t b) const {
  const LatticePoint pa = shifted(a), pb = shifted(b);
  const std::vector<int> key = box_pair_key(pa, pb, big_.n);
  {
    std::lock_guard<std::mutex> lock(memo_mu_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second / std::sqrt(diag_[a] * diag_[b]);
  }
  const double cov = kernel_.entry(pa, pb);
  std::lock_guard<std::mutex> lock(memo_mu_);
  memo_.emplace(key, cov);
  return cov / std::sqrt(diag_[a] * diag_[b]);
}

BernoulliSummary marginal_summary(const DependencyGraph& graph, const PairLaw& law,
                                  const NormalizingConstants& consts,
                                  const std::vector<LevelSet>& level_sets) {
  if (level_sets.size() != graph.parts.size())
    throw std::invalid_argument("marginal_summary: one level set per part required");
  BernoulliSummary s;
  s.level_sets = level_sets;
  s.p.assign(graph.box.site_count(), 0.0);
  s.lambda.assign(graph.parts.size(), 0.0);
  for (std::size_t j = 0; j < graph.parts.size(); ++j) {
    for (std::int64_t idx : graph.parts[j]) {
      const double p = marginal_p(law.sigma(idx), consts, level_sets[j]);
      s.p[idx] = p;
      s.lambda[j] += p;
    }
  }
  return s;
}

double compute_b1(const DependencyGraph& graph, const BernoulliSummary& summary) {
  const LatticeBox& box = graph.box;
  if (graph.full_cover()) {
    // B_alpha = I for every alpha: the double sum collapses to (sum p)^2
    double tot = 0.0;
    for (const auto& part : graph.parts)
      for (std::int64_t idx : part) tot += summary.p[idx];
    return tot * tot;
  }
  const int r = graph.ball_radius();
  double b1 = 0.0;
  LatticePoint q(box.d);
  for (std::size_t j = 0; j < graph.parts.size(); ++j) {
    for (std::int64_t idx : graph.parts[j]) {
      const LatticePoint p = box.point_at(idx);
      double inner = 0.0;
      // iterate the l-infinity ball, clipped to the box
      std::vector<int> lo(box.d), span(box.d);
      std::int64_t cells = 1;
      for (int i = 0; i < box.d; ++i) {
        lo[i] = std::max(0, p[i] - r);
        span[i] = std::min(box.n - 1, p[i] + r) - lo[i] + 1;
        cells *= span[i];
      }
      for (std::int64_t c = 0; c < cells; ++c) {
        std::int64_t rem = c;
        for (int i = box.d - 1; i >= 0; --i) {
          q[i] = lo[i] + static_cast<int>(rem % span[i]);
          rem /= span[i];
        }
        const std::int64_t bidx = box.index_of(q);
        if (graph.part_of[bidx] >= 0) inner += summary.p[bidx];
      }
      b1 += summary.p[idx] * inner;
    }
  }
  return b1;
}

double bivariate_upper_tail(double rho, double t1, double t2) {
  if (std::abs(rho) > 1.0) throw std::invalid_argument("bivariate_upper_tail: |rho| > 1");
  if (rho == 0.0) return normal_upper_tail(t1) * normal_upper_tail(t2);
  if (rho == 1.0) return normal_upper_tail(std::max(t1, t2));
  if (rho == -1.0) {
    // Z > t1 and -Z > t2: the slab (t1, -t2]
    const double v = normal_upper_tail(t1) - normal_upper_tail(-t2);
    return std::max(0.0, v);
  }
  const double s = std::sqrt((1.0 - rho) * (1.0 + rho));
  const double lo = std::max(t1, -12.0);
  const double hi = std::max(lo + 40.0, 13.0);
  // conditioned tail, integrated panel by panel
  auto f = [&](double x) {
    return normal_pdf(x) * normal_upper_tail((t2 - rho * x) / s);
  };
  double total = 0.0;
  double a = lo;
  while (a < hi) {
    const double b = std::min(a + 1.0, hi);
    total += gauss_integrate(f, a, b, 24);
    a = b;
  }
  if (t1 < -12.0) total += (normal_cdf(-12.0) - normal_cdf(t1));  // tail where Phi-bar factor ~ 1
  return total;
}

double joint_tail(double rho, double t) { return bivariate_upper_tail(rho, t, t); }

namespace {

// E[X_a X_b] for level sets R_a, R_b: inclusion-exclusion over the upper
// tails at the interval endpoints
double joint_level_prob(double rho, double sigma_a, double sigma_b,
                        const NormalizingConstants& consts, const LevelSet& ra,
                        const LevelSet& rb) {
  double total = 0.0;
  for (const auto& [x1, y1] : ra.intervals) {
    for (const auto& [x2, y2] : rb.intervals) {
      const double tx1 = consts.threshold(x1) / sigma_a;
      const double tx2 = consts.threshold(x2) / sigma_b;
      total += bivariate_upper_tail(rho, tx1, tx2);
      if (!std::isinf(y2)) total -= bivariate_upper_tail(rho, tx1, consts.threshold(y2) / sigma_b);
      if (!std::isinf(y1)) total -= bivariate_upper_tail(rho, consts.threshold(y1) / sigma_a, tx2);
      if (!std::isinf(y1) && !std::isinf(y2))
        total += bivariate_upper_tail(rho, consts.threshold(y1) / sigma_a,
                                      consts.threshold(y2) / sigma_b);
    }
  }
  return total;
}

struct QuantKey {
  long long rho, ta, tb, ja, jb;
  bool operator<(const QuantKey& o) const {
    return std::tie(rho, ta, tb, ja, jb) < std::tie(o.rho, o.ta, o.tb, o.ja, o.jb);
  }
};

long long quant(double x) { return static_cast<long long>(std::llround(x * 1e12)); }

}  // namespace

B2Result compute_b2(const DependencyGraph& graph, const BernoulliSummary& summary,
                    const PairLaw& law, const NormalizingConstants& consts, double z,
                    double kappa) {
  if (!std::isfinite(z)) throw std::invalid_argument("compute_b2: z must be finite");
  const LatticeBox& box = graph.box;
  const double N = static_cast<double>(box.site_count());
  const int r = graph.full_cover() ? box.n - 1 : graph.ball_radius();

  // repeated (rho, t_a, t_b, part pair) tuples share one quadrature
  std::map<QuantKey, double> cache;

  B2Result out;
  LatticePoint q(box.d);
  for (std::size_t j = 0; j < graph.parts.size(); ++j) {
    for (std::int64_t idx : graph.parts[j]) {
      const LatticePoint p = box.point_at(idx);
      std::vector<int> lo(box.d), span(box.d);
      std::int64_t cells = 1;
      for (int i = 0; i < box.d; ++i) {
        lo[i] = std::max(0, p[i] - r);
        span[i] = std::min(box.n - 1, p[i] + r) - lo[i] + 1;
        cells *= span[i];
      }
      const double sa = law.sigma(idx);
      for (std::int64_t c = 0; c < cells; ++c) {
        std::int64_t rem = c;
        for (int i = box.d - 1; i >= 0; --i) {
          q[i] = lo[i] + static_cast<int>(rem % span[i]);
          rem /= span[i];
        }
        const std::int64_t bidx = box.index_of(q);
        if (bidx == idx) continue;
        const int jb = graph.part_of[bidx];
        if (jb < 0) continue;
        const double sb = law.sigma(bidx);
        const double rho = law.correlation(idx, bidx);
        const QuantKey key{quant(rho), quant(sa), quant(sb), static_cast<long long>(j),
                           static_cast<long long>(jb)};
        auto it = cache.find(key);
        double v;
        if (it != cache.end()) {
          v = it->second;
        } else {
          v = joint_level_prob(rho, sa, sb, consts, summary.level_sets[j],
                               summary.level_sets[jb]);
          cache.emplace(key, v);
        }
        out.numeric += v;
        ++out.ordered_pairs;
      }
    }
  }

  const double branch = z <= 0 ? std::exp(-2.0 * z) : std::exp(-2.0 * z / (2.0 - kappa));
  out.analytic = static_cast<double>(out.ordered_pairs) * std::pow(2.0 - kappa, 1.5) /
                 std::sqrt(kappa) * std::pow(N, -2.0 / (2.0 - kappa)) * branch;
  return out;
}

B3Certificate b3_certificate(const DependencyGraph& graph, const GreenTable& green,
                             const NormalizingConstants& consts, double z, double epsilon) {
  B3Certificate cert;
  if (graph.member_count == 0 || graph.full_cover()) return cert;  // empty sup convention

  const LatticeBox& box = graph.box;
  const int r = graph.ball_radius();
  const int diam = box.n - 1;
  green.ensure_cube(diam);

  // suffix maxima of per-shell maxima make the per-site shell scan exact
  std::vector<double> suffix(diam + 2, 0.0);
  for (int s = diam; s >= 1; --s)
    suffix[s] = std::max(suffix[s + 1], green.shell_max(s));

  double sup_green = 0.0;
  LatticePoint q(box.d);
  for (const auto& part : graph.parts) {
    for (std::int64_t idx : part) {
      const LatticePoint p = box.point_at(idx);
      double best = 0.0;
      for (int s = r + 1; s <= diam; ++s) {
        if (suffix[s] <= best) break;  // no farther shell can improve
        // iterate the l-infinity sphere of radius s around p
        std::vector<int> lo(box.d), span(box.d);
        std::int64_t cells = 1;
        for (int i = 0; i < box.d; ++i) {
          lo[i] = std::max(0, p[i] - s);
          span[i] = std::min(box.n - 1, p[i] + s) - lo[i] + 1;
          cells *= span[i];
        }
        for (std::int64_t c = 0; c < cells; ++c) {
          std::int64_t rem = c;
          int norm = 0;
          for (int i = box.d - 1; i >= 0; --i) {
            q[i] = lo[i] + static_cast<int>(rem % span[i]);
            rem /= span[i];
            norm = std::max(norm, std::abs(q[i] - p[i]));
          }
          if (norm != s) continue;
          const std::int64_t bidx = box.index_of(q);
          if (graph.part_of[bidx] < 0) continue;
          best = std::max(best, green.infinite(sub(q, p)));
        }
      }
      sup_green = std::max(sup_green, best);
    }
  }

  cert.sup_green = sup_green;
  cert.var_bound = sup_green;
  if (sup_green > 0.0) {
    const double u = consts.threshold(z);
    const double tau = std::pow(u, -1.0 - epsilon);
    cert.tail_bound = static_cast<double>(graph.member_count) * 2.0 *
                      std::exp(-tau * tau / (2.0 * cert.var_bound));
  }
  return cert;
}

double tv_bound(double b1, double b2, double b3_used, double lambda_min) {
  if (lambda_min <= 0) throw std::invalid_argument("tv_bound: lambda_min must be positive");
  if (b1 < 0 || b2 < 0 || b3_used < 0) throw std::invalid_argument("tv_bound: negative input");
  return 2.0 * std::min(1.0, 1.4 / std::sqrt(lambda_min)) * (2.0 * b1 + 2.0 * b2 + b3_used);
}

nlohmann::json SteinChenReport::to_json() const {
  return nlohmann::json{{"schema_version", 1},
                        {"d", d},
                        {"n", n},
                        {"source", source},
                        {"delta", delta},
                        {"z", z},
                        {"epsilon", epsilon},
                        {"radius_rule", radius_rule},
                        {"radius", radius},
                        {"g0", g0},
                        {"lambda", lambda},
                        {"lambda_min", lambda_min},
                        {"b1", b1},
                        {"b2_numeric", b2_numeric},
                        {"b2_analytic", b2_analytic},
                        {"b2_pairs", b2_pairs},
                        {"b3_certificate",
                         {{"sup_green", b3.sup_green},
                          {"var_bound", b3.var_bound},
                          {"tail_bound", b3.tail_bound}}},
                        {"b3_policy", b3_policy},
                        {"b3_used", b3_used},
                        {"tv_bound", tv}};
}

SteinChenReport make_report(const DependencyGraph& graph, const BernoulliSummary& summary,
                            const PairLaw& law, const GreenTable& green,
                            const NormalizingConstants& consts, double z, B3Policy policy) {
  SteinChenReport rep;
  rep.d = graph.box.d;
  rep.n = graph.box.n;
  rep.source = graph.source == PatternSource::bulk ? "bulk" : "full_box";
  rep.delta = graph.delta;
  rep.z = z;
  rep.epsilon = graph.epsilon;
  rep.radius_rule = graph.rule.label();
  rep.radius = graph.radius;
  rep.g0 = green.g0();
  rep.lambda = summary.lambda;
  rep.lambda_min = summary.lambda_min();
  rep.b1 = compute_b1(graph, summary);
  const B2Result b2 = compute_b2(graph, summary, law, consts, z, green.kappa());
  rep.b2_numeric = b2.numeric;
  rep.b2_analytic = b2.analytic;
  rep.b2_pairs = b2.ordered_pairs;
  rep.b3 = b3_certificate(graph, green, consts, z, graph.epsilon);
  rep.b3_policy = policy == B3Policy::zero ? "zero" : "certificate";
  rep.b3_used = policy == B3Policy::zero ? 0.0 : rep.b3.tail_bound;
  rep.tv = tv_bound(rep.b1, rep.b2_numeric, rep.b3_used, rep.lambda_min);
  return rep;
}

}  // namespace dgff
