// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
//
// Infinite-volume Green's function of simple random walk on Z^d via the
// Fourier representation
//
//   g(a) = (2pi)^-d  Integral_{[-pi,pi]^d}  prod_i cos(k_i a_i) / D(k)  dk,
//   D(k) = 1 - (1/d) sum_i cos k_i = (2/d) sum_i sin^2(k_i/2),
//
// integrable at k = 0 for d >= 3. The domain is folded to [0,pi]^d (the
// integrand is even per axis) and split into dyadic shells toward the
// singularity; each shell is a union of 2^d - 1 tensor Gauss panels on
// which the integrand is smooth. The innermost box B_L is replaced by the
// exact scaling value of its dominant part 2d/|k|^2; the remainder there
// is O(vol(B_L)) and is dropped below tolerance.

#include "dgff/green.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <nlohmann/json.hpp>

#include "dgff/quadrature.hpp"

namespace dgff {

namespace {

constexpr double kPi = std::numbers::pi;

// integral of |x|^-2 over [-1,1]^d: one smooth shell plus an exact
// geometric continuation, since the integrand scales by 2^(2-d) per level.
double inverse_square_box_integral(int d) {
  static std::map<int, double> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(d);
  if (it != cache.end()) return it->second;

  const int m = 48;
  std::vector<double> xs_in, ws_in, xs_out, ws_out;
  gauss_on_interval(m, 0.0, 0.5, xs_in, ws_in);
  gauss_on_interval(m, 0.5, 1.0, xs_out, ws_out);

  double shell = 0.0;
  const int panel_count = (1 << d) - 1;
  std::vector<int> q(d);
  for (int code = 1; code <= panel_count; ++code) {
    std::fill(q.begin(), q.end(), 0);
    const std::int64_t grid = [&] {
      std::int64_t g = 1;
      for (int i = 0; i < d; ++i) g *= m;
      return g;
    }();
    for (std::int64_t idx = 0; idx < grid; ++idx) {
      std::int64_t rem = idx;
      double r2 = 0.0, w = 1.0;
      for (int i = d - 1; i >= 0; --i) {
        const int qi = static_cast<int>(rem % m);
        rem /= m;
        const bool outer = (code >> i) & 1;
        const double x = outer ? xs_out[qi] : xs_in[qi];
        w *= outer ? ws_out[qi] : ws_in[qi];
        r2 += x * x;
      }
      shell += w / r2;
    }
  }
  const double value = std::ldexp(shell, d) / (1.0 - std::pow(2.0, 2 - d));
  cache[d] = value;
  return value;
}

// One quadrature pass over all offsets in the cartesian product of
// axis_values (entries nonnegative). Returns the tensor flattened with
// axis 0 slowest.
std::vector<double> green_pass(int d, const std::vector<std::vector<int>>& axis_values,
                               const QuadSpec& spec, int pad) {
  int amax = 0;
  std::int64_t out_size = 1;
  for (const auto& vals : axis_values) {
    for (int v : vals) amax = std::max(amax, v);
    out_size *= static_cast<std::int64_t>(vals.size());
  }

  std::vector<double> out(out_size, 0.0);

  const int panel_count = (1 << d) - 1;
  for (int level = 0; level < spec.levels; ++level) {
    const double a = kPi * std::ldexp(1.0, -level);
    // per-axis Gauss order: enough nodes for the cos(k a_i) oscillation
    const int m = std::max(spec.base_nodes + pad,
                           static_cast<int>(std::ceil(0.25 * amax * a)) + spec.base_nodes + pad);

    std::vector<double> xs_in, ws_in, xs_out, ws_out;
    gauss_on_interval(m, 0.0, 0.5 * a, xs_in, ws_in);
    gauss_on_interval(m, 0.5 * a, a, xs_out, ws_out);

    for (int code = 1; code <= panel_count; ++code) {
      // per-axis node tables for this panel
      std::vector<const std::vector<double>*> xs(d), ws(d);
      for (int i = 0; i < d; ++i) {
        const bool outer = (code >> i) & 1;
        xs[i] = outer ? &xs_out : &xs_in;
        ws[i] = outer ? &ws_out : &ws_in;
      }
      std::vector<std::vector<double>> sin2(d);
      for (int i = 0; i < d; ++i) {
        sin2[i].resize(m);
        for (int q = 0; q < m; ++q) {
          const double s = std::sin(0.5 * (*xs[i])[q]);
          sin2[i][q] = s * s;
        }
      }

      // grid of w / D(k), weights folded in
      std::int64_t grid = 1;
      for (int i = 0; i < d; ++i) grid *= m;
      std::vector<double> cur(grid);
      for (std::int64_t idx = 0; idx < grid; ++idx) {
        std::int64_t rem = idx;
        double e = 0.0, w = 1.0;
        for (int i = d - 1; i >= 0; --i) {
          const int qi = static_cast<int>(rem % m);
          rem /= m;
          e += sin2[i][qi];
          w *= (*ws[i])[qi];
        }
        cur[idx] = w * 0.5 * d / e;  // 1/D = (d/2) / sum sin^2
      }

      // contract one axis at a time against cos(k_i * value)
      std::int64_t outer_sz = 1, rest = grid;
      for (int i = 0; i < d; ++i) {
        const auto& vals = axis_values[i];
        const std::int64_t nv = vals.size();
        rest /= m;
        std::vector<double> cos_tab(nv * m);
        for (std::int64_t v = 0; v < nv; ++v)
          for (int q = 0; q < m; ++q) cos_tab[v * m + q] = std::cos((*xs[i])[q] * vals[v]);

        std::vector<double> next(outer_sz * nv * rest, 0.0);
        for (std::int64_t o = 0; o < outer_sz; ++o) {
          const double* in_block = cur.data() + o * m * rest;
          for (std::int64_t v = 0; v < nv; ++v) {
            double* out_block = next.data() + (o * nv + v) * rest;
            const double* ct = cos_tab.data() + v * m;
            for (int q = 0; q < m; ++q) {
              const double c = ct[q];
              const double* in_row = in_block + q * rest;
              for (std::int64_t r = 0; r < rest; ++r) out_block[r] += c * in_row[r];
            }
          }
        }
        cur = std::move(next);
        outer_sz *= nv;
      }
      for (std::int64_t v = 0; v < out_size; ++v) out[v] += cur[v];
    }
  }

  // fold factor, innermost-box closure, Fourier normalization
  const double tail = 2.0 * d * std::pow(kPi * std::ldexp(1.0, -spec.levels), d - 2) *
                      inverse_square_box_integral(d);
  const double norm = std::pow(2.0 * kPi, -d);
  for (auto& v : out) v = norm * (std::ldexp(v, d) + tail);
  return out;
}

std::vector<double> green_tensor(int d, const std::vector<std::vector<int>>& axis_values,
                                 const QuadSpec& spec) {
  std::vector<double> a = green_pass(d, axis_values, spec, 0);
  std::vector<double> b = green_pass(d, axis_values, spec, 8);
  auto max_diff = [](const std::vector<double>& u, const std::vector<double>& v) {
    double md = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) md = std::max(md, std::abs(u[i] - v[i]));
    return md;
  };
  double resid = max_diff(a, b);
  if (resid <= spec.tolerance) return b;
  std::vector<double> c = green_pass(d, axis_values, spec, 16);
  resid = max_diff(b, c);
  if (resid <= spec.tolerance) return c;
  std::ostringstream msg;
  msg << "green quadrature did not converge: residual " << resid << " > tolerance "
      << spec.tolerance;
  throw std::runtime_error(msg.str());
}

LatticePoint fold_offset(const LatticePoint& offset) {
  LatticePoint f(offset.size());
  for (std::size_t i = 0; i < offset.size(); ++i) f[i] = std::abs(offset[i]);
  return f;
}

LatticePoint canonical_offset(const LatticePoint& offset) {
  LatticePoint f = fold_offset(offset);
  std::sort(f.begin(), f.end(), std::greater<int>());
  return f;
}

std::string column_key(const LatticeBox& box, const LatticePoint& beta) {
  std::ostringstream os;
  os << box.signature() << ";beta=";
  for (std::size_t i = 0; i < beta.size(); ++i) os << (i ? "," : "") << beta[i];
  return os.str();
}

using SpMat = Eigen::SparseMatrix<double>;

}  // namespace

Eigen::SparseMatrix<double> box_precision(const LatticeBox& box) {
  const std::int64_t N = box.site_count();
  const double off = -1.0 / (2.0 * box.d);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(N * (box.d + 1));
  LatticePoint p(box.d);
  for (std::int64_t idx = 0; idx < N; ++idx) {
    p = box.point_at(idx);
    trip.emplace_back(idx, idx, 1.0);
    for (int i = 0; i < box.d; ++i) {
      for (int s : {-1, 1}) {
        p[i] += s;
        if (p[i] >= 0 && p[i] < box.n) trip.emplace_back(idx, box.index_of(p), off);
        p[i] -= s;
      }
    }
  }
  SpMat Q(N, N);
  Q.setFromTriplets(trip.begin(), trip.end());
  return Q;
}

std::vector<double> green_finite_column(const LatticeBox& box, const LatticePoint& beta,
                                        const SolverSpec& solver) {
  if (!box.contains(beta))
    throw std::invalid_argument("green_finite_column: beta outside the box");
  const std::int64_t N = box.site_count();
  SpMat Q = box_precision(box);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
  rhs[box.index_of(beta)] = 1.0;

  Eigen::VectorXd x;
  if (N <= solver.direct_limit) {
    Eigen::SimplicialLLT<SpMat> llt(Q);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("green_finite_column: Cholesky factorization failed");
    x = llt.solve(rhs);
  } else {
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(solver.tolerance);
    cg.setMaxIterations(solver.max_iterations);
    cg.compute(Q);
    x = cg.solve(rhs);
    if (cg.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "green_finite_column: CG did not converge, residual " << cg.error();
      throw std::runtime_error(msg.str());
    }
  }
  return std::vector<double>(x.data(), x.data() + N);
}

GreenTable::GreenTable(int d, QuadSpec spec) : d_(d), spec_(spec) {
  if (d < 3)
    throw std::invalid_argument("GreenTable: d must be >= 3 (walk recurrent, integral diverges)");
  if (spec_.tolerance <= 0) throw std::invalid_argument("GreenTable: tolerance must be positive");
  std::vector<std::vector<int>> axes(d_, std::vector<int>{0});
  g0_ = green_tensor(d_, axes, spec_)[0];
}

double GreenTable::cube_lookup_unlocked(const LatticePoint& folded) const {
  std::int64_t idx = 0;
  for (int i = 0; i < d_; ++i) idx = idx * (cube_radius_ + 1) + folded[i];
  return cube_[idx];
}

void GreenTable::ensure_cube(int radius) const {
  std::lock_guard<std::mutex> lock(mu_);
  if (radius <= cube_radius_) return;
  std::vector<int> vals(radius + 1);
  for (int v = 0; v <= radius; ++v) vals[v] = v;
  std::vector<std::vector<int>> axes(d_, vals);
  cube_ = green_tensor(d_, axes, spec_);
  cube_radius_ = radius;
  // make permutation symmetry exact: every cell takes its sorted
  // representative's value
  const int side = radius + 1;
  std::int64_t total = 1;
  for (int i = 0; i < d_; ++i) total *= side;
  LatticePoint p(d_);
  for (std::int64_t idx = 0; idx < total; ++idx) {
    std::int64_t rem = idx;
    for (int i = d_ - 1; i >= 0; --i) {
      p[i] = static_cast<int>(rem % side);
      rem /= side;
    }
    std::sort(p.begin(), p.end(), std::greater<int>());
    std::int64_t canon = 0;
    for (int i = 0; i < d_; ++i) canon = canon * side + p[i];
    cube_[idx] = cube_[canon];
  }
}

double GreenTable::infinite(const LatticePoint& offset) const {
  if (static_cast<int>(offset.size()) != d_)
    throw std::invalid_argument("GreenTable::infinite: offset dimension mismatch");
  LatticePoint folded = fold_offset(offset);
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (cube_radius_ >= 0 && *std::max_element(folded.begin(), folded.end()) <= cube_radius_)
      return cube_lookup_unlocked(folded);
    LatticePoint canon = canonical_offset(offset);
    auto it = extra_.find(canon);
    if (it != extra_.end()) return it->second;
  }
  LatticePoint canon = canonical_offset(offset);
  std::vector<std::vector<int>> axes(d_);
  for (int i = 0; i < d_; ++i) axes[i] = {canon[i]};
  const double value = green_tensor(d_, axes, spec_)[0];
  std::lock_guard<std::mutex> lock(mu_);
  extra_.emplace(std::move(canon), value);
  return value;
}

double GreenTable::shell_max(int s) const {
  std::lock_guard<std::mutex> lock(mu_);
  if (s > cube_radius_) throw std::invalid_argument("GreenTable::shell_max: shell beyond cube");
  double best = 0.0;
  LatticePoint p(d_, 0);
  const int side = cube_radius_ + 1;
  std::int64_t total = 1;
  for (int i = 0; i < d_; ++i) total *= side;
  for (std::int64_t idx = 0; idx < total; ++idx) {
    std::int64_t rem = idx;
    int mx = 0;
    for (int i = d_ - 1; i >= 0; --i) {
      mx = std::max(mx, static_cast<int>(rem % side));
      rem /= side;
    }
    if (mx == s) best = std::max(best, cube_[idx]);
  }
  return best;
}

const std::vector<double>& GreenTable::finite_column(const LatticeBox& box,
                                                     const LatticePoint& beta,
                                                     const SolverSpec& solver) const {
  if (box.d != d_) throw std::invalid_argument("GreenTable::finite_column: dimension mismatch");
  const std::string key = column_key(box, beta);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = columns_.find(key);
    if (it != columns_.end()) return it->second;
  }
  std::vector<double> col;
  const std::int64_t N = box.site_count();
  if (N <= solver.direct_limit) {
    if (!box.contains(beta))
      throw std::invalid_argument("green_finite_column: beta outside the box");
    // shared factorization per box; columns are cheap after the first
    std::shared_ptr<Eigen::SimplicialLLT<SpMat>> llt;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto fit = factor_cache_.find(box.signature());
      if (fit != factor_cache_.end())
        llt = std::static_pointer_cast<Eigen::SimplicialLLT<SpMat>>(fit->second);
    }
    if (!llt) {
      llt = std::make_shared<Eigen::SimplicialLLT<SpMat>>(box_precision(box));
      if (llt->info() != Eigen::Success)
        throw std::runtime_error("finite_column: Cholesky factorization failed");
      std::lock_guard<std::mutex> lock(mu_);
      factor_cache_.emplace(box.signature(), llt);
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
    rhs[box.index_of(beta)] = 1.0;
    Eigen::VectorXd x = llt->solve(rhs);
    col.assign(x.data(), x.data() + N);
  } else {
    col = green_finite_column(box, beta, solver);
  }
  std::lock_guard<std::mutex> lock(mu_);
  return columns_.emplace(key, std::move(col)).first->second;
}

nlohmann::json GreenTable::to_json() const {
  std::lock_guard<std::mutex> lock(mu_);
  nlohmann::json j;
  j["schema_version"] = 1;
  j["d"] = d_;
  j["quad_spec"] = {{"base_nodes", spec_.base_nodes},
                    {"levels", spec_.levels},
                    {"tolerance", spec_.tolerance}};
  j["g0"] = g0_;
  std::map<LatticePoint, double> entries = extra_;
  if (cube_radius_ >= 0) {
    const int side = cube_radius_ + 1;
    std::int64_t total = 1;
    for (int i = 0; i < d_; ++i) total *= side;
    for (std::int64_t idx = 0; idx < total; ++idx) {
      std::int64_t rem = idx;
      LatticePoint p(d_);
      for (int i = d_ - 1; i >= 0; --i) {
        p[i] = static_cast<int>(rem % side);
        rem /= side;
      }
      std::sort(p.begin(), p.end(), std::greater<int>());
      entries.emplace(p, cube_[idx]);
    }
  }
  nlohmann::json ej = nlohmann::json::array();
  for (const auto& [off, v] : entries) ej.push_back({off, v});
  j["entries"] = std::move(ej);
  nlohmann::json cj = nlohmann::json::object();
  for (const auto& [key, col] : columns_) cj[key] = col;
  j["finite_columns"] = std::move(cj);
  return j;
}

GreenTable GreenTable::from_json(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != 1)
    throw std::invalid_argument("GreenTable::from_json: unsupported schema version");
  QuadSpec spec;
  spec.base_nodes = j.at("quad_spec").at("base_nodes").get<int>();
  spec.levels = j.at("quad_spec").at("levels").get<int>();
  spec.tolerance = j.at("quad_spec").at("tolerance").get<double>();
  GreenTable t(j.at("d").get<int>(), spec);
  std::lock_guard<std::mutex> lock(t.mu_);
  for (const auto& e : j.at("entries"))
    t.extra_[e.at(0).get<LatticePoint>()] = e.at(1).get<double>();
  for (const auto& [key, col] : j.at("finite_columns").items())
    t.columns_[key] = col.get<std::vector<double>>();
  return t;
}

double kappa(int d, const QuadSpec& spec) { return GreenTable(d, spec).kappa(); }

}  // namespace dgff
