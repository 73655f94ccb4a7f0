// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <nlohmann/json_fwd.hpp>

#include "dgff/lattice.hpp"

namespace dgff {

/// Tensor-product Gauss quadrature of the Green's function Fourier
/// integral over [-pi,pi]^d, with dyadic refinement toward the k = 0
/// singularity. A result is accepted once two node-count refinements
/// agree within `tolerance`.
struct QuadSpec {
  int base_nodes = 16;      // per-axis Gauss order floor on each shell
  int levels = 20;          // dyadic shells toward k = 0
  double tolerance = 1e-9;  // refinement agreement threshold
};

/// Dirichlet solves: sparse Cholesky up to `direct_limit` unknowns,
/// Jacobi-preconditioned conjugate gradient above.
struct SolverSpec {
  std::int64_t direct_limit = 10000;
  double tolerance = 1e-10;
  int max_iterations = 50000;
};

/// Precision matrix Q = I - P of the box: unit diagonal, -1/(2d) for
/// nearest-neighbor pairs inside the box. Symmetric positive definite.
Eigen::SparseMatrix<double> box_precision(const LatticeBox& box);

/// Dirichlet Green's function column g_Lambda(., beta) on a box, no cache.
std::vector<double> green_finite_column(const LatticeBox& box, const LatticePoint& beta,
                                        const SolverSpec& solver = {});

/// Infinite-volume and Dirichlet lattice Green's functions for simple
/// random walk on Z^d, d >= 3.
///
/// Memoization is internal and thread-safe; a table is immutable from the
/// caller's point of view and safe for concurrent reads.
class GreenTable {
 public:
  explicit GreenTable(int d, QuadSpec spec = {});

  GreenTable(GreenTable&& other) noexcept
      : d_(other.d_), spec_(other.spec_), g0_(other.g0_) {
    std::lock_guard<std::mutex> lock(other.mu_);
    cube_radius_ = other.cube_radius_;
    cube_ = std::move(other.cube_);
    extra_ = std::move(other.extra_);
    columns_ = std::move(other.columns_);
    factor_cache_ = std::move(other.factor_cache_);
  }

  int dimension() const { return d_; }
  const QuadSpec& quad_spec() const { return spec_; }

  /// g(0), the walk's expected number of visits to its start. > 1 for d >= 3.
  double g0() const { return g0_; }

  /// Escape probability kappa = 1/g(0), in (0,1).
  double kappa() const { return 1.0 / g0_; }

  /// g(offset); symmetric under sign flips and coordinate permutations.
  double infinite(const LatticePoint& offset) const;

  /// Precompute every offset with |a_i| <= radius in one tensor pass.
  void ensure_cube(int radius) const;
  int cube_radius() const { return cube_radius_; }

  /// Largest g over offsets with l-infinity norm exactly s (needs cube).
  double shell_max(int s) const;

  /// Cached Dirichlet column; beta must lie in the box.
  const std::vector<double>& finite_column(const LatticeBox& box, const LatticePoint& beta,
                                           const SolverSpec& solver = {}) const;

  nlohmann::json to_json() const;
  static GreenTable from_json(const nlohmann::json& j);

 private:
  int d_;
  QuadSpec spec_;
  double g0_ = 0.0;

  mutable std::mutex mu_;
  mutable int cube_radius_ = -1;
  mutable std::vector<double> cube_;  // folded cube, (radius+1)^d, lexicographic
  mutable std::map<LatticePoint, double> extra_;  // canonical (sorted |a|) offsets
  mutable std::map<std::string, std::vector<double>> columns_;
  mutable std::map<std::string, std::shared_ptr<void>> factor_cache_;

  double cube_lookup_unlocked(const LatticePoint& folded) const;
};

/// Escape probability of simple random walk in Z^d; rejects d < 3.
double kappa(int d, const QuadSpec& spec = {});

}  // namespace dgff
