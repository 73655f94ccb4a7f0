// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dgff/steinchen.hpp"

namespace dgff {

inline constexpr const char* kToolkitVersion = "0.1.0";

std::uint64_t fnv1a64(std::string_view bytes);

/// Experiment parameters. Flat key=value config files plus command-line
/// overrides; `threads` and `out` are execution details and stay out of
/// the canonical form so reports are byte-identical across machines and
/// thread counts.
struct ExperimentConfig {
  int d = 3;
  int n = 16;
  double delta = 0.25;
  double epsilon = 0.1;
  std::string radius_rule = "fixed:2";  // paper | paper-bulk | fixed:<r>
  std::string field = "zero";           // zero | infinite
  std::string method = "factor";        // factor | enlarged:<factor>
  double z = 0.0;
  std::int64_t reps = 1000;
  std::uint64_t seed = 1;
  std::int64_t dense_cap = 4096;
  double c_d = 1.0;
  int table_radius = -1;  // green table export radius; -1 means n-1

  // execution details, excluded from the canonical form
  int threads = 1;
  std::string out = "out";

  /// Throws std::invalid_argument naming the offending key.
  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);
  void validate() const;

  std::string canonical() const;
  std::uint64_t config_hash() const { return fnv1a64(canonical()); }

  RadiusRule parsed_radius_rule() const;
  FieldKind parsed_field() const;
  /// Margin factor of "enlarged:<f>"; 0 when method is "factor".
  double parsed_margin() const;
};

}  // namespace dgff
