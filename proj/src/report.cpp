// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0

#include "dgff/report.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dgff/config.hpp"

namespace dgff {

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

namespace {

void append_double(std::string& s, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  s += buf;
}

}  // namespace

std::string field_csv(const FieldSample& field) {
  std::string s;
  for (int i = 0; i < field.box.d; ++i) s += "c" + std::to_string(i + 1) + ",";
  s += "value\n";
  for (std::int64_t idx = 0; idx < field.box.site_count(); ++idx) {
    const LatticePoint p = field.box.point_at(idx);
    for (int c : p) s += std::to_string(c) + ",";
    append_double(s, field.values[idx]);
    s += '\n';
  }
  return s;
}

std::string pattern_csv(const PointPattern& pattern) {
  std::string s;
  for (int i = 0; i < pattern.d; ++i) s += "x" + std::to_string(i + 1) + ",";
  s += "height\n";
  for (std::int64_t i = 0; i < pattern.size(); ++i) {
    for (int j = 0; j < pattern.d; ++j) {
      append_double(s, pattern.locations[i * pattern.d + j]);
      s += ',';
    }
    append_double(s, pattern.heights[i]);
    s += '\n';
  }
  return s;
}

PointPattern parse_pattern_csv(const std::string& csv, int d) {
  PointPattern pat;
  pat.d = d;
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("pattern csv: missing header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    for (int j = 0; j < d; ++j) {
      if (!std::getline(row, cell, ',')) throw std::runtime_error("pattern csv: short row");
      pat.locations.push_back(std::stod(cell));
    }
    if (!std::getline(row, cell, ',')) throw std::runtime_error("pattern csv: short row");
    pat.heights.push_back(std::stod(cell));
  }
  return pat;
}

nlohmann::json field_envelope(const FieldSample& field) {
  return nlohmann::json{{"schema_version", 1},
                        {"toolkit_version", kToolkitVersion},
                        {"d", field.box.d},
                        {"n", field.box.n},
                        {"kind", to_string(field.kind)},
                        {"method", to_string(field.method)},
                        {"seed", field.seed},
                        {"bias_bound", field.bias_bound}};
}

void ArtifactIndex::add(const std::string& relative) {
  std::ifstream in(root_ + "/" + relative, std::ios::binary);
  if (!in) throw std::runtime_error("index: cannot read artifact " + root_ + "/" + relative);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  char hash[20];
  std::snprintf(hash, sizeof(hash), "%016" PRIx64, fnv1a64(bytes));
  entries_.push_back(nlohmann::json{
      {"path", relative}, {"bytes", bytes.size()}, {"fnv1a64", std::string(hash)}});
}

nlohmann::json ArtifactIndex::to_json() const {
  return nlohmann::json{{"schema_version", 1},
                        {"toolkit_version", kToolkitVersion},
                        {"artifacts", entries_}};
}

void ArtifactIndex::write() const { write_json_file(root_ + "/index.json", to_json()); }

}  // namespace dgff
