// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dgff/extremes.hpp"
#include "dgff/sampler.hpp"

namespace dgff {

/// Throws std::runtime_error carrying the path on I/O failure.
void write_text_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const nlohmann::json& j);

/// Field dump: one "c_1,...,c_d,value" row per site, lexicographic order.
std::string field_csv(const FieldSample& field);

/// Point dump: one "x_1,...,x_d,height" row per point.
std::string pattern_csv(const PointPattern& pattern);

/// Parses pattern_csv output back; used by round-trip checks.
PointPattern parse_pattern_csv(const std::string& csv, int d);

/// Provenance sidecar for a field or pattern dump.
nlohmann::json field_envelope(const FieldSample& field);

/// List of artifact files with content hashes.
class ArtifactIndex {
 public:
  explicit ArtifactIndex(std::string root) : root_(std::move(root)) {}
  /// Registers `relative` (already written under the root).
  void add(const std::string& relative);
  nlohmann::json to_json() const;
  void write() const;  // <root>/index.json

 private:
  std::string root_;
  std::vector<nlohmann::json> entries_;
};

}  // namespace dgff
