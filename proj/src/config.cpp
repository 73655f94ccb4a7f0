// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0

#include "dgff/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dgff {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream is(value);
  T v{};
  is >> v;
  if (is.fail() || !is.eof())
    throw std::invalid_argument("config: invalid value '" + value + "' for field '" + key + "'");
  return v;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "dim") d = parse_number<int>(key, value);
  else if (key == "n") n = parse_number<int>(key, value);
  else if (key == "delta") delta = parse_number<double>(key, value);
  else if (key == "epsilon") epsilon = parse_number<double>(key, value);
  else if (key == "radius_rule") radius_rule = value;
  else if (key == "field") field = value;
  else if (key == "method") method = value;
  else if (key == "z") z = parse_number<double>(key, value);
  else if (key == "reps") reps = parse_number<std::int64_t>(key, value);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "dense_cap") dense_cap = parse_number<std::int64_t>(key, value);
  else if (key == "c_d") c_d = parse_number<double>(key, value);
  else if (key == "table_radius") table_radius = parse_number<int>(key, value);
  else if (key == "threads") threads = parse_number<int>(key, value);
  else if (key == "out") out = value;
  else throw std::invalid_argument("config: unknown field '" + key + "'");
}

void ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not 'key = value'");
    set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

void ExperimentConfig::validate() const {
  if (d < 3) throw std::invalid_argument("config: field 'dim' must be >= 3");
  if (n < 2) throw std::invalid_argument("config: field 'n' must be >= 2");
  if (!(delta > 0 && delta < 0.5))
    throw std::invalid_argument("config: field 'delta' must lie in (0, 1/2)");
  if (epsilon <= 0) throw std::invalid_argument("config: field 'epsilon' must be positive");
  if (reps < 1) throw std::invalid_argument("config: field 'reps' must be positive");
  if (threads < 1) throw std::invalid_argument("config: field 'threads' must be positive");
  if (dense_cap < 1) throw std::invalid_argument("config: field 'dense_cap' must be positive");
  if (c_d <= 0) throw std::invalid_argument("config: field 'c_d' must be positive");
  if (field != "zero" && field != "infinite")
    throw std::invalid_argument("config: field 'field' must be 'zero' or 'infinite'");
  parsed_radius_rule();
  parsed_margin();
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os.precision(17);
  os << "c_d=" << c_d << "\ndelta=" << delta << "\ndense_cap=" << dense_cap << "\ndim=" << d
     << "\nepsilon=" << epsilon << "\nfield=" << field << "\nmethod=" << method << "\nn=" << n
     << "\nradius_rule=" << radius_rule << "\nreps=" << reps << "\nseed=" << seed
     << "\ntable_radius=" << table_radius << "\nz=" << z << "\n";
  return os.str();
}

RadiusRule ExperimentConfig::parsed_radius_rule() const {
  if (radius_rule == "paper") return RadiusRule::paper();
  if (radius_rule == "paper-bulk") return RadiusRule::paper_bulk();
  if (radius_rule.rfind("fixed:", 0) == 0) {
    const double r = parse_number<double>("radius_rule", radius_rule.substr(6));
    if (r < 0) throw std::invalid_argument("config: field 'radius_rule' needs radius >= 0");
    return RadiusRule::fixed(r);
  }
  throw std::invalid_argument(
      "config: field 'radius_rule' must be paper, paper-bulk or fixed:<r>");
}

FieldKind ExperimentConfig::parsed_field() const {
  return field == "zero" ? FieldKind::zero_boundary : FieldKind::infinite_volume;
}

double ExperimentConfig::parsed_margin() const {
  if (method == "factor") return 0.0;
  if (method.rfind("enlarged:", 0) == 0) {
    const double m = parse_number<double>("method", method.substr(9));
    if (m < 2.0) throw std::invalid_argument("config: field 'method' needs enlarged factor >= 2");
    return m;
  }
  throw std::invalid_argument("config: field 'method' must be 'factor' or 'enlarged:<factor>'");
}

}  // namespace dgff
