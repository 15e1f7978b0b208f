#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "songoku/bench.hpp"
#include "songoku/config.hpp"
#include "songoku/content_hash.hpp"
#include "songoku/experiments.hpp"

using namespace songoku;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("songoku_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
  const AppConfig c = parse_config_text("K:int = 6\nd = 40  # dimension\nT = 64\n");
  CHECK(c.tasks == 6);
  CHECK(c.dim == 40);
  CHECK(c.scheduler.total_steps == 64);
  CHECK(c.scheduler.refresh_period == 32);
  CHECK(c.scheduler.beta == 0.9);
  const auto j = nlohmann::json::parse(config_json(c));
  CHECK(j["K"] == 6);
  CHECK(j.contains("tau_star"));
}

TEST_CASE("invalid values name the field") {
  try {
    parse_config_text("tau_star = 1.5\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "tau_star");
    CHECK(std::string(e.what()).find("(0, 1]") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("R = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("bogus = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("K:real = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("K = three\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("just text\n"), ConfigError);
}

TEST_CASE("emit and re-parse is identical") {
  AppConfig c;
  set_config_value(c, "sketch_mode", "fd");
  set_config_value(c, "beta", "0.123456789012345");
  set_config_value(c, "bench_K", "2,5,9");
  set_config_value(c, "permute_classes", "true");
  set_config_value(c, "combinator", "project_and_scale");
  const AppConfig back = parse_config_text(emit_config(c));
  CHECK(back == c);
  CHECK(emit_config(back) == emit_config(c));
  CHECK(back.scheduler.beta == c.scheduler.beta);
  CHECK(back.bench_tasks == std::vector<std::size_t>{2, 5, 9});
  CHECK(config_help().find("tau_star") != std::string::npos);
}

TEST_CASE("git blob hash") {
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("bench with one repeat and one step") {
  BenchConfig b;
  b.tasks = {3};
  b.periods = {4};
  b.dim = 16;
  b.steps = 1;
  b.repeats = 1;
  const auto res = run_bench(b);
  CHECK(res.rows.size() == 4);
  for (const auto& r : res.rows) {
    CHECK(r.samples.size() == 1);
    CHECK(r.std_seconds == 0.0);
    CHECK(r.mean_seconds > 0.0);
  }
  CHECK(res.fair());
  std::ostringstream csv;
  write_bench_csv(csv, res);
  CHECK(csv.str().rfind("# songoku bench csv v1", 0) == 0);
  CHECK(parse_bench_method("songoku+scale") == BenchMethod::kSongokuScale);
  BenchConfig bad = b;
  bad.repeats = 0;
  CHECK_THROWS(run_bench(bad));
}

TEST_CASE("tensor is shared and checksummed") {
  const auto a = make_gradient_tensor(5, 3, 8, 1);
  const auto b = make_gradient_tensor(5, 3, 8, 1);
  CHECK(tensor_checksum(a) == tensor_checksum(b));
  CHECK(tensor_checksum(a) != tensor_checksum(make_gradient_tensor(5, 3, 8, 2)));
}

TEST_CASE("unknown experiment lists the names") {
  AppConfig c;
  c.experiment = "nope";
  c.out = scratch("nope").string();
  try {
    run_experiment(c);
    FAIL("expected UnknownExperiment");
  } catch (const UnknownExperiment& e) {
    for (const auto& n : experiment_names()) CHECK(std::string(e.what()).find(n) != std::string::npos);
  }
}

TEST_CASE("run and staleness audit write artifacts") {
  AppConfig c;
  c.sigma = 0.2;
  c.scheduler.total_steps = 256;
  for (const std::string name : {"run", "staleness_audit"}) {
    c.experiment = name;
    c.out = scratch(name).string();
    run_experiment(c);
    CHECK(fs::exists(fs::path(c.out) / "run.csv"));
    std::ifstream f(fs::path(c.out) / "summary.json");
    const auto j = nlohmann::json::parse(f);
    CHECK(j["input_hash"] == git_blob_hash(emit_config(c)));
    CHECK(j["config"]["T"] == 256);
    CHECK(j["audit"]["ok"] == true);
    if (name == "staleness_audit") {
      CHECK(j["max_gap_per_task"].size() == 8);
      CHECK(j["staleness_ok"] == true);
    }
  }
}

TEST_CASE("recovery curve without noise is always exact") {
  AppConfig c;
  c.experiment = "recovery_curve";
  c.sigma = 0.0;
  c.trials = 20;
  c.out = scratch("rc").string();
  const auto j = nlohmann::json::parse(run_experiment(c));
  for (const auto& p : j["points"]) CHECK(p["rate"] == 1.0);
  CHECK(fs::exists(fs::path(c.out) / "recovery_curve.csv"));
}

TEST_CASE("ablation drivers") {
  AppConfig c;
  c.sigma = 0.3;
  c.scheduler.total_steps = 640;
  const auto single = ablation_singlestep(c, 2);
  CHECK(single.instability_single > single.instability_full);
  CHECK(single.recovery_single < single.recovery_full);
  const auto stat = ablation_static(c);
  CHECK(stat.violations_static >= 1);
  CHECK(stat.violations_dynamic == 0);
  CHECK(stat.switch_step % c.scheduler.refresh_period == 0);
}

TEST_CASE("sched_vs_agg driver") {
  AppConfig c;
  c.experiment = "sched_vs_agg";
  c.out = scratch("sva").string();
  const auto j = nlohmann::json::parse(run_experiment(c));
  CHECK(j["improvement"].get<double>() >= 1e-6);
  CHECK(j["block_diagonal_max_diff"].get<double>() <= 1e-12);
}
