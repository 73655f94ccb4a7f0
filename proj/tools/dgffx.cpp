// Copyright dgff-extremes contributors
// SPDX-License-Identifier: Apache-2.0
//
// dgffx: experiment runner. Subcommands build Green tables, dump field
// samples and point patterns, compute Stein-Chen reports, and run the
// verification panel. Exit codes: 0 all hard tests pass, 1 hard failure
// or I/O error, 2 configuration error.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "dgff/config.hpp"
#include "dgff/normal.hpp"
#include "dgff/parallel.hpp"
#include "dgff/report.hpp"
#include "dgff/verify.hpp"

namespace {

using namespace dgff;

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

nlohmann::json config_json(const ExperimentConfig& cfg) {
  return nlohmann::json{{"dim", cfg.d},
                        {"n", cfg.n},
                        {"delta", cfg.delta},
                        {"epsilon", cfg.epsilon},
                        {"radius_rule", cfg.radius_rule},
                        {"field", cfg.field},
                        {"method", cfg.method},
                        {"z", cfg.z},
                        {"reps", cfg.reps},
                        {"seed", cfg.seed},
                        {"dense_cap", cfg.dense_cap},
                        {"c_d", cfg.c_d},
                        {"table_radius", cfg.table_radius},
                        {"hash", hash_hex(cfg.config_hash())}};
}

struct Runtime {
  ExperimentConfig cfg;
  LatticeBox box;
  std::shared_ptr<GreenTable> green;
  std::unique_ptr<FieldSampler> sampler;

  explicit Runtime(const ExperimentConfig& c)
      : cfg(c),
        box(c.d, c.n, c.delta),
        green(std::make_shared<GreenTable>(c.d)),
        sampler(std::make_unique<FieldSampler>(
            green, SamplerConfig{c.dense_cap, c.parsed_margin() > 0 ? c.parsed_margin() : 4.0,
                                 c.c_d})) {}

  FieldSample draw(const RngSpec& stream) const {
    if (cfg.parsed_field() == FieldKind::zero_boundary) return sampler->zero_boundary(box, stream);
    if (cfg.parsed_margin() > 0) return sampler->infinite_enlarged(box, stream);
    return sampler->infinite_exact(box, stream);
  }

  std::unique_ptr<PairLaw> field_law() const {
    if (cfg.parsed_field() == FieldKind::zero_boundary)
      return std::make_unique<FiniteVolumeLaw>(box);
    if (cfg.parsed_margin() > 0)
      return std::make_unique<EnlargedWindowLaw>(box, sampler->enlarged_side(box));
    return std::make_unique<InfiniteVolumeLaw>(box, green);
  }
};

void ensure_dirs(const std::string& out, bool with_data) {
  std::filesystem::create_directories(out);
  if (with_data) std::filesystem::create_directories(out + "/data");
}

int run_green(const ExperimentConfig& cfg, ArtifactIndex& index) {
  GreenTable green(cfg.d);
  const int radius = cfg.table_radius >= 0 ? cfg.table_radius : cfg.n - 1;
  green.ensure_cube(radius);
  const std::string name = "green_d" + std::to_string(cfg.d) + ".json";
  write_json_file(cfg.out + "/" + name, green.to_json());
  index.add(name);
  std::printf("green: d=%d g0=%.12f kappa=%.12f cube radius %d -> %s\n", cfg.d, green.g0(),
              green.kappa(), radius, (cfg.out + "/" + name).c_str());
  return 0;
}

int run_sample(const Runtime& rt, ArtifactIndex& index) {
  const RngSpec rng{rt.cfg.seed};
  for (std::int64_t r = 0; r < rt.cfg.reps; ++r) {
    const FieldSample f = rt.draw(rng.substream(r));
    const std::string base = "data/field_r" + std::to_string(r);
    write_text_file(rt.cfg.out + "/" + base + ".csv", field_csv(f));
    write_json_file(rt.cfg.out + "/" + base + ".json", field_envelope(f));
    index.add(base + ".csv");
    index.add(base + ".json");
  }
  std::printf("sample: wrote %lld field dumps under %s/data\n",
              static_cast<long long>(rt.cfg.reps), rt.cfg.out.c_str());
  return 0;
}

int run_extremes(const Runtime& rt, ArtifactIndex& index) {
  const RngSpec rng{rt.cfg.seed};
  const auto consts = NormalizingConstants::from(rt.box.site_count(), rt.green->g0());
  const std::vector<double> zs = {-1.0, 0.0, 1.0};

  std::string counts_csv = "rep";
  for (double z : zs) counts_csv += ",count_above_z" + std::to_string(static_cast<int>(z));
  counts_csv += "\n";

  for (std::int64_t r = 0; r < rt.cfg.reps; ++r) {
    const FieldSample f = rt.draw(rng.substream(r));
    const PointPattern pat = extract_points(f, consts, PatternSource::full_box);
    if (r == 0) {
      write_text_file(rt.cfg.out + "/data/pattern_r0.csv", pattern_csv(pat));
      nlohmann::json side = field_envelope(f);
      side["consts"] = {{"N", consts.N}, {"g0", consts.g0}, {"b_N", consts.b}, {"a_N", consts.a}};
      write_json_file(rt.cfg.out + "/data/pattern_r0.json", side);
      index.add("data/pattern_r0.csv");
      index.add("data/pattern_r0.json");
    }
    counts_csv += std::to_string(r);
    for (double z : zs)
      counts_csv += "," + std::to_string(count_points(pat, cube_above(rt.box.d, z)));
    counts_csv += "\n";
  }
  write_text_file(rt.cfg.out + "/data/counts.csv", counts_csv);
  index.add("data/counts.csv");
  std::printf("extremes: wrote pattern and %lld count rows under %s/data\n",
              static_cast<long long>(rt.cfg.reps), rt.cfg.out.c_str());
  return 0;
}

SteinChenReport bounds_report(const Runtime& rt, const std::unique_ptr<PairLaw>& law) {
  const auto consts = NormalizingConstants::from(rt.box.site_count(), rt.green->g0());
  const auto graph = build_neighborhoods(rt.box, {cube_above(rt.box.d, rt.cfg.z)},
                                         rt.cfg.epsilon, rt.cfg.parsed_radius_rule());
  const LevelSet above{{rt.cfg.z, std::numeric_limits<double>::infinity()}};
  const auto summary = marginal_summary(graph, *law, consts, {above});
  return make_report(graph, summary, *law, *rt.green, consts, rt.cfg.z, B3Policy::zero);
}

int run_bounds(const Runtime& rt, ArtifactIndex& index) {
  const auto law = rt.field_law();
  const SteinChenReport rep = bounds_report(rt, law);
  nlohmann::json j = rep.to_json();
  j["config"] = config_json(rt.cfg);
  j["toolkit_version"] = kToolkitVersion;
  write_json_file(rt.cfg.out + "/steinchen.json", j);
  index.add("steinchen.json");
  std::printf("bounds: b1=%.6g b2=%.6g tv=%.6g -> %s/steinchen.json\n", rep.b1, rep.b2_numeric,
              rep.tv, rt.cfg.out.c_str());
  return 0;
}

TestReport mills_self_check(std::uint64_t seed) {
  TestReport r;
  r.test = "mills_bracket";
  r.mode = "self_test";
  r.master_seed = seed;
  double worst = 0.0;
  bool ok = true;
  for (double t = 0.5; t <= 10.0; t += 0.25) {
    const auto [lo, hi] = mills_bracket(t);
    const double tail = normal_upper_tail(t);
    ok = ok && lo <= tail && tail <= hi;
    worst = std::max(worst, std::max(lo - tail, tail - hi));
  }
  r.statistic = worst;
  r.verdict = ok ? "pass" : "fail";
  r.extras["grid"] = "t in [0.5, 10] step 0.25";
  return r;
}

int run_verify(const Runtime& rt, ArtifactIndex& index) {
  const ExperimentConfig& cfg = rt.cfg;
  if (cfg.reps < 100)
    throw std::invalid_argument("config: field 'reps' must be >= 100 for the verify panel");
  const RngSpec rng{cfg.seed};
  const auto consts = NormalizingConstants::from(rt.box.site_count(), rt.green->g0());
  const Rectangle rect = cube_above(rt.box.d, cfg.z);
  const auto law = rt.field_law();

  const auto graph = build_neighborhoods(rt.box, {rect}, cfg.epsilon, cfg.parsed_radius_rule());
  const LevelSet above{{cfg.z, std::numeric_limits<double>::infinity()}};
  const auto summary = marginal_summary(graph, *law, consts, {above});
  const SteinChenReport screport =
      make_report(graph, summary, *law, *rt.green, consts, cfg.z, B3Policy::zero);

  // one pass of replications feeds the count, avoidance, TV and max tests
  const std::int64_t M = cfg.reps;
  std::vector<std::int64_t> counts(M);
  std::vector<double> maxima(M);
  parallel_for(M, cfg.threads, [&](std::int64_t r) {
    const FieldSample f = rt.draw(rng.substream(r));
    const PointPattern pat = extract_points(f, consts, PatternSource::full_box);
    counts[r] = count_points(pat, rect);
    maxima[r] = max_rescaled(f, consts);
  });

  std::vector<TestReport> tests;
  tests.push_back(mills_self_check(cfg.seed));
  tests.push_back(
      poisson_count_test(counts, rect, TestMode::exact_finite_N, summary.lambda[0], cfg.seed));
  tests.push_back(poisson_count_test(counts, rect, TestMode::limit,
                                     intensity_mass(rect, rt.box.d, PatternSource::full_box),
                                     cfg.seed));
  {
    std::vector<std::vector<std::int64_t>> count_rows(M);
    for (std::int64_t r = 0; r < M; ++r) count_rows[r] = {counts[r]};
    tests.push_back(avoidance_test(count_rows, {rect}, graph, summary, screport.tv, cfg.seed));
    if (M >= 1000 && summary.lambda[0] <= 10.0)
      tests.push_back(empirical_tv(count_rows, {summary.lambda[0]}, screport.tv, cfg.seed));
  }
  tests.push_back(gumbel_test(maxima, cfg.seed));
  tests.push_back(markov_property_test(*rt.sampler, rt.box, LatticePoint(rt.box.d, rt.box.n / 2),
                                       3, std::max<std::int64_t>(M, 1000),
                                       rng.substream(0x4D41524B), cfg.threads));

  bool all_pass = true;
  nlohmann::json test_json = nlohmann::json::array();
  for (const TestReport& t : tests) {
    all_pass = all_pass && !t.failed();
    test_json.push_back(t.to_json());
    std::printf("[%s] %-16s stat=%.6g ref=%.6g tol=%.6g\n",
                t.verdict == "fail" ? "FAIL" : (t.verdict == "pass" ? "PASS" : "diag"),
                t.test.c_str(), t.statistic, t.reference, t.tolerance);
  }

  nlohmann::json report{{"schema_version", 1},
                        {"toolkit_version", kToolkitVersion},
                        {"config", config_json(cfg)},
                        {"green", {{"d", cfg.d}, {"g0", rt.green->g0()}, {"kappa", rt.green->kappa()}}},
                        {"steinchen", screport.to_json()},
                        {"tests", test_json},
                        {"overall", all_pass ? "pass" : "fail"}};
  write_json_file(cfg.out + "/report.json", report);
  index.add("report.json");

  std::string counts_csv = "rep,count\n";
  std::string max_csv = "rep,max_rescaled\n";
  for (std::int64_t r = 0; r < M; ++r) {
    char buf[64];
    counts_csv += std::to_string(r) + "," + std::to_string(counts[r]) + "\n";
    std::snprintf(buf, sizeof(buf), "%lld,%.17g\n", static_cast<long long>(r), maxima[r]);
    max_csv += buf;
  }
  write_text_file(cfg.out + "/data/counts.csv", counts_csv);
  write_text_file(cfg.out + "/data/maxima.csv", max_csv);
  index.add("data/counts.csv");
  index.add("data/maxima.csv");

  std::printf("verify: %s -> %s/report.json\n", all_pass ? "pass" : "FAIL", cfg.out.c_str());
  return all_pass ? 0 : 1;
}

void add_common_options(CLI::App* cmd, ExperimentConfig& cfg, std::string& config_path) {
  cmd->add_option("--config", config_path, "flat key=value config file");
  cmd->add_option("--dim", cfg.d, "lattice dimension (>= 3)");
  cmd->add_option("--n", cfg.n, "box side length");
  cmd->add_option("--delta", cfg.delta, "bulk parameter in (0, 1/2)");
  cmd->add_option("--epsilon", cfg.epsilon, "neighborhood exponent epsilon");
  cmd->add_option("--radius-rule", cfg.radius_rule, "paper | paper-bulk | fixed:<r>");
  cmd->add_option("--field", cfg.field, "zero | infinite");
  cmd->add_option("--method", cfg.method, "factor | enlarged:<factor>");
  cmd->add_option("--z", cfg.z, "level for the default rectangle");
  cmd->add_option("--reps", cfg.reps, "replication count");
  cmd->add_option("--seed", cfg.seed, "master seed");
  cmd->add_option("--threads", cfg.threads, "worker threads (or env DGFF_THREADS)");
  cmd->add_option("--out", cfg.out, "output directory");
  cmd->add_option("--table-radius", cfg.table_radius, "green table export radius");
  cmd->add_option("--dense-cap", cfg.dense_cap, "site limit for dense sampling");
  cmd->add_option("--c-d", cfg.c_d, "bulk gap constant C_d");
}

}  // namespace

int main(int argc, char** argv) {
  ExperimentConfig cfg;
  std::string config_path;

  // config file values load first; explicit flags override them
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) config_path = argv[i + 1];
    else if (a.rfind("--config=", 0) == 0) config_path = a.substr(9);
  }
  try {
    if (!config_path.empty()) cfg.load_file(config_path);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  CLI::App app{"extremal statistics toolkit for the lattice Gaussian free field"};
  app.require_subcommand(1);
  std::string dummy;
  CLI::App* c_green = app.add_subcommand("green", "build and export Green tables");
  CLI::App* c_sample = app.add_subcommand("sample", "dump field samples");
  CLI::App* c_extremes = app.add_subcommand("extremes", "dump point patterns and counts");
  CLI::App* c_bounds = app.add_subcommand("bounds", "compute the Stein-Chen report");
  CLI::App* c_verify = app.add_subcommand("verify", "run the verification panel");
  CLI::App* c_all = app.add_subcommand("all", "green + bounds + verify pipeline");
  for (CLI::App* c : {c_green, c_sample, c_extremes, c_bounds, c_verify, c_all})
    add_common_options(c, cfg, dummy);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  // sample/extremes default to a single replication unless asked
  if ((c_sample->parsed() || c_extremes->parsed()) &&
      c_sample->count("--reps") + c_extremes->count("--reps") == 0 && config_path.empty())
    cfg.reps = 1;

  // thread-count precedence: --threads, then DGFF_THREADS, then config file
  bool threads_flag = false;
  for (CLI::App* c : {c_green, c_sample, c_extremes, c_bounds, c_verify, c_all})
    threads_flag = threads_flag || (c->parsed() && c->count("--threads") > 0);
  if (!threads_flag) {
    if (const char* env = std::getenv("DGFF_THREADS")) {
      const int t = std::atoi(env);
      if (t > 0) cfg.threads = t;
    }
  }

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }

  try {
    ensure_dirs(cfg.out, true);
    ArtifactIndex index(cfg.out);
    int rc = 0;
    if (c_green->parsed()) {
      rc = run_green(cfg, index);
    } else if (c_sample->parsed()) {
      Runtime rt(cfg);
      rc = run_sample(rt, index);
    } else if (c_extremes->parsed()) {
      Runtime rt(cfg);
      rc = run_extremes(rt, index);
    } else if (c_bounds->parsed()) {
      Runtime rt(cfg);
      rc = run_bounds(rt, index);
    } else if (c_verify->parsed()) {
      Runtime rt(cfg);
      rc = run_verify(rt, index);
    } else if (c_all->parsed()) {
      Runtime rt(cfg);
      rc = run_green(cfg, index);
      if (rc == 0) rc = run_bounds(rt, index);
      if (rc == 0) rc = run_verify(rt, index);
    }
    index.write();
    return rc;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
