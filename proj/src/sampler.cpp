// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0

#include "dgff/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <fftw3.h>

namespace dgff {

std::string to_string(FieldKind k) {
  return k == FieldKind::zero_boundary ? "zero_boundary" : "infinite_volume";
}
std::string to_string(SampleMethod m) {
  return m == SampleMethod::factorization ? "factorization" : "enlarged_box";
}

namespace {

// FFTW buffers; fftw_malloc keeps alignment consistent with the plans
struct FftwBuffer {
  double* data = nullptr;
  explicit FftwBuffer(std::size_t count) {
    data = static_cast<double*>(fftw_malloc(sizeof(double) * count));
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

// plan creation is not thread-safe; execution on distinct arrays is
class DstPlans {
 public:
  fftw_plan get(int d, int n) {
    std::lock_guard<std::mutex> lock(mu_);
    const auto key = std::make_pair(d, n);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<int> dims(d, n);
    std::vector<fftw_r2r_kind> kinds(d, FFTW_RODFT00);
    std::size_t count = 1;
    for (int i = 0; i < d; ++i) count *= n;
    FftwBuffer tmp(count);
    fftw_plan p = fftw_plan_r2r(d, dims.data(), tmp.data, tmp.data, kinds.data(), FFTW_ESTIMATE);
    if (!p) throw std::runtime_error("sampler: FFTW plan creation failed");
    plans_.emplace(key, p);
    return p;
  }
  ~DstPlans() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  std::mutex mu_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

DstPlans& dst_plans() {
  static DstPlans plans;
  return plans;
}

// sizes whose DST factors well: m+1 with prime factors in {2,3,5,7}
int next_friendly_side(int m) {
  for (;; ++m) {
    int v = m + 1;
    for (int f : {2, 3, 5, 7})
      while (v % f == 0) v /= f;
    if (v == 1) return m;
  }
}

}  // namespace

struct FieldSampler::Impl {
  std::mutex mu;
  // dense Cholesky factor of [g(a-b)] per box signature
  std::map<std::string, std::shared_ptr<Eigen::MatrixXd>> dense_factor;
};

FieldSampler::FieldSampler(std::shared_ptr<const GreenTable> green, SamplerConfig cfg)
    : green_(std::move(green)), cfg_(cfg), impl_(std::make_unique<Impl>()) {
  if (!green_) throw std::invalid_argument("FieldSampler: null Green table");
}

FieldSampler::~FieldSampler() = default;

FieldSample FieldSampler::zero_boundary(const LatticeBox& box, const RngSpec& rng) const {
  const int d = box.d, n = box.n;
  const std::int64_t N = box.site_count();

  // per-axis spectral cosines
  std::vector<double> cosines(n);
  for (int k = 0; k < n; ++k) cosines[k] = std::cos(std::numbers::pi * (k + 1) / (n + 1));

  FftwBuffer buf(N);
  GaussianStream gauss(rng);
  // draw in fixed lexicographic mode order, then scale by (1 - lambda)^{-1/2}
  for (std::int64_t idx = 0; idx < N; ++idx) {
    std::int64_t rem = idx;
    double c = 0.0;
    for (int i = d - 1; i >= 0; --i) {
      c += cosines[rem % n];
      rem /= n;
    }
    const double one_minus_lambda = 1.0 - c / d;
    buf.data[idx] = gauss.next() / std::sqrt(one_minus_lambda);
  }

  fftw_plan plan = dst_plans().get(d, n);
  fftw_execute_r2r(plan, buf.data, buf.data);

  // normalization: eigenvectors (2/(n+1))^{d/2} prod sin, transform carries 2^d
  const double norm = std::pow(0.5 / (n + 1), 0.5 * d);
  FieldSample s;
  s.box = box;
  s.kind = FieldKind::zero_boundary;
  s.method = SampleMethod::factorization;
  s.seed = rng.master_seed;
  s.bias_bound = 0.0;
  s.values.resize(N);
  for (std::int64_t idx = 0; idx < N; ++idx) s.values[idx] = norm * buf.data[idx];
  return s;
}

FieldSample FieldSampler::infinite_exact(const LatticeBox& box, const RngSpec& rng) const {
  const std::int64_t N = box.site_count();
  if (N > cfg_.dense_cap) {
    std::ostringstream msg;
    msg << "infinite_exact: " << N << " sites exceed the dense cap " << cfg_.dense_cap
        << "; use the enlarged-box method";
    throw std::runtime_error(msg.str());
  }
  std::shared_ptr<Eigen::MatrixXd> L;
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    auto it = impl_->dense_factor.find(box.signature());
    if (it != impl_->dense_factor.end()) L = it->second;
  }
  if (!L) {
    green_->ensure_cube(box.n - 1);
    Eigen::MatrixXd cov(N, N);
    for (std::int64_t i = 0; i < N; ++i) {
      const LatticePoint pi = box.point_at(i);
      for (std::int64_t j = 0; j <= i; ++j) {
        const double v = green_->infinite(sub(pi, box.point_at(j)));
        cov(i, j) = v;
        cov(j, i) = v;
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("infinite_exact: covariance factorization failed");
    L = std::make_shared<Eigen::MatrixXd>(llt.matrixL());
    std::lock_guard<std::mutex> lock(impl_->mu);
    impl_->dense_factor.emplace(box.signature(), L);
  }

  Eigen::VectorXd z(N);
  GaussianStream gauss(rng);
  for (std::int64_t i = 0; i < N; ++i) z[i] = gauss.next();
  Eigen::VectorXd x = (*L) * z;

  FieldSample s;
  s.box = box;
  s.kind = FieldKind::infinite_volume;
  s.method = SampleMethod::factorization;
  s.seed = rng.master_seed;
  s.bias_bound = 0.0;
  s.values.assign(x.data(), x.data() + N);
  return s;
}

int FieldSampler::enlarged_side(const LatticeBox& box, double margin_factor) const {
  const double margin = margin_factor > 0 ? margin_factor : cfg_.margin_factor;
  if (margin < 2.0)
    throw std::invalid_argument("infinite_enlarged: margin_factor must be >= 2");
  return next_friendly_side(static_cast<int>(std::ceil(margin * box.n)));
}

FieldSample FieldSampler::infinite_enlarged(const LatticeBox& box, const RngSpec& rng,
                                            double margin_factor) const {
  const int m = enlarged_side(box, margin_factor);
  const LatticeBox big(box.d, m);
  FieldSample whole = zero_boundary(big, rng);

  const int start = (m - box.n) / 2;
  const std::int64_t N = box.site_count();
  FieldSample s;
  s.box = box;
  s.kind = FieldKind::infinite_volume;
  s.method = SampleMethod::enlarged_box;
  s.seed = rng.master_seed;
  // Lemma-style gap on the window: delta' = (m-n)/(2m), so delta'*m = (m-n)/2
  s.bias_bound = cfg_.c_d * std::pow(0.5 * (m - box.n), 2.0 - box.d);
  s.values.resize(N);
  LatticePoint p(box.d);
  for (std::int64_t idx = 0; idx < N; ++idx) {
    std::int64_t rem = idx;
    for (int i = box.d - 1; i >= 0; --i) {
      p[i] = start + static_cast<int>(rem % box.n);
      rem /= box.n;
    }
    s.values[idx] = whole.values[big.index_of(p)];
  }
  return s;
}

FieldSample FieldSampler::infinite_volume(const LatticeBox& box, const RngSpec& rng) const {
  if (box.site_count() <= cfg_.dense_cap) return infinite_exact(box, rng);
  return infinite_enlarged(box, rng);
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Green's column of the walk killed on the conditioning set (and outside
// the box), i.e. one solve on U = box \ conditioning.
std::vector<double> killed_green_column(const LatticeBox& box, const LatticePoint& alpha,
                                        const std::vector<char>& is_conditioning,
                                        const SolverSpec& solver) {
  const std::int64_t N = box.site_count();
  std::vector<std::int64_t> u_of_site(N, -1);
  std::vector<std::int64_t> sites;
  sites.reserve(N);
  for (std::int64_t i = 0; i < N; ++i) {
    if (!is_conditioning[i]) {
      u_of_site[i] = static_cast<std::int64_t>(sites.size());
      sites.push_back(i);
    }
  }
  const std::int64_t NU = sites.size();
  const double off = -1.0 / (2.0 * box.d);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(NU * (box.d + 1));
  for (std::int64_t u = 0; u < NU; ++u) {
    trip.emplace_back(u, u, 1.0);
    LatticePoint p = box.point_at(sites[u]);
    for (int i = 0; i < box.d; ++i) {
      for (int sgn : {-1, 1}) {
        p[i] += sgn;
        if (p[i] >= 0 && p[i] < box.n) {
          const std::int64_t v = u_of_site[box.index_of(p)];
          if (v >= 0) trip.emplace_back(u, v, off);
        }
        p[i] -= sgn;
      }
    }
  }
  SpMat Q(NU, NU);
  Q.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(NU);
  rhs[u_of_site[box.index_of(alpha)]] = 1.0;
  Eigen::VectorXd x;
  if (NU <= solver.direct_limit) {
    Eigen::SimplicialLLT<SpMat> llt(Q);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("conditional_mean: factorization failed");
    x = llt.solve(rhs);
  } else {
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(solver.tolerance);
    cg.setMaxIterations(solver.max_iterations);
    cg.compute(Q);
    x = cg.solve(rhs);
    if (cg.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "conditional_mean: CG did not converge, residual " << cg.error();
      throw std::runtime_error(msg.str());
    }
  }
  // scatter back to box indexing
  std::vector<double> col(N, 0.0);
  for (std::int64_t u = 0; u < NU; ++u) col[sites[u]] = x[u];
  return col;
}

}  // namespace

std::vector<double> hitting_probabilities(const LatticeBox& box, const LatticePoint& alpha,
                                          const std::vector<std::int64_t>& conditioning,
                                          const SolverSpec& solver) {
  if (!box.contains(alpha))
    throw std::invalid_argument("hitting_probabilities: alpha outside the box");
  const std::int64_t N = box.site_count();
  std::vector<char> is_cond(N, 0);
  for (std::int64_t i : conditioning) {
    if (i < 0 || i >= N)
      throw std::invalid_argument("hitting_probabilities: conditioning site outside the box");
    is_cond[i] = 1;
  }
  const std::int64_t a_idx = box.index_of(alpha);
  if (is_cond[a_idx])
    throw std::invalid_argument("hitting_probabilities: alpha lies in the conditioning set");
  if (conditioning.empty()) return {};

  const std::vector<double> col = killed_green_column(box, alpha, is_cond, solver);
  // last-step decomposition: P_a(S_H = b) = (1/2d) sum_{y ~ b, y in U} g_U(a, y)
  std::vector<double> h(conditioning.size(), 0.0);
  const double w = 1.0 / (2.0 * box.d);
  for (std::size_t j = 0; j < conditioning.size(); ++j) {
    LatticePoint p = box.point_at(conditioning[j]);
    double acc = 0.0;
    for (int i = 0; i < box.d; ++i) {
      for (int sgn : {-1, 1}) {
        p[i] += sgn;
        if (p[i] >= 0 && p[i] < box.n) {
          const std::int64_t y = box.index_of(p);
          if (!is_cond[y]) acc += col[y];
        }
        p[i] -= sgn;
      }
    }
    h[j] = w * acc;
  }
  return h;
}

ConditionalMeanKernel::ConditionalMeanKernel(const LatticeBox& box, const LatticePoint& alpha,
                                             std::vector<std::int64_t> conditioning,
                                             const SolverSpec& solver)
    : conditioning_(std::move(conditioning)) {
  weights_ = hitting_probabilities(box, alpha, conditioning_, solver);
}

double ConditionalMeanKernel::apply(const std::vector<double>& boundary_values) const {
  if (boundary_values.size() != conditioning_.size())
    throw std::invalid_argument("ConditionalMeanKernel: boundary value count mismatch");
  double mu = 0.0;
  for (std::size_t j = 0; j < weights_.size(); ++j) mu += weights_[j] * boundary_values[j];
  return mu;
}

double ConditionalMeanKernel::apply_field(const std::vector<double>& field_values) const {
  double mu = 0.0;
  for (std::size_t j = 0; j < weights_.size(); ++j)
    mu += weights_[j] * field_values[conditioning_[j]];
  return mu;
}

double conditional_mean(const LatticeBox& box, const LatticePoint& alpha,
                        const std::vector<std::int64_t>& conditioning,
                        const std::vector<double>& boundary_values, const SolverSpec& solver) {
  if (conditioning.empty()) {
    if (!boundary_values.empty())
      throw std::invalid_argument("conditional_mean: values given for empty conditioning set");
    return 0.0;  // centered field, no information
  }
  ConditionalMeanKernel kernel(box, alpha, conditioning, solver);
  return kernel.apply(boundary_values);
}

}  // namespace dgff
