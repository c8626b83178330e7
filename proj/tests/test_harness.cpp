#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hjlab/errors.hpp"
#include "hjlab/harness.hpp"

using namespace hjlab;

namespace {

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "hjlab_harness_test";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("rate fit") {
  std::vector<std::pair<double, double>> linear, cube_root;
  for (double eps : {0.5, 0.25, 0.125, 0.0625}) {
    linear.emplace_back(eps, 2.0 * eps);
    cube_root.emplace_back(eps, std::cbrt(eps));
  }
  const RateFit a = fit_rate(linear);
  CHECK(a.exponent == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.intercept == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(a.residual <= 1e-12);
  CHECK(a.used == 4);
  CHECK(fit_rate(cube_root).exponent == doctest::Approx(1.0 / 3).epsilon(1e-12));

  linear.emplace_back(1.0 / 32, 0.0);
  const RateFit b = fit_rate(linear);
  CHECK(b.used == 4);
  CHECK(b.notes.size() == 1);
  CHECK(b.exponent == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(fit_rate({{0.5, 1.0}, {0.25, 0.0}}), PreconditionError);
}

TEST_CASE("config parsing and overrides") {
  RunConfig cfg;
  cfg.validate();
  const Json j = cfg.to_json();
  CHECK(RunConfig::from_json(j).to_json() == j);

  Json bad = j;
  bad["rate"]["epsilon"] = 0.5;
  CHECK_THROWS_AS(RunConfig::from_json(bad), ConfigError);
  bad = j;
  bad["rate"]["t"] = "one";
  CHECK_THROWS_AS(RunConfig::from_json(bad), ConfigError);

  cfg.apply_override("rate.t=2");
  CHECK(cfg.rate.t == 2.0);
  cfg.apply_override("model.params.B=0.5");
  CHECK(cfg.model.params.at("B") == 0.5);
  cfg.apply_override("format=csv");
  CHECK(cfg.format == "csv");
  cfg.apply_override("rate.epsilons=[0.5,0.25,0.125]");
  CHECK(cfg.rate.epsilons.size() == 3);
  CHECK_THROWS_AS(cfg.apply_override("rate.bogus=1"), ConfigError);
  CHECK_THROWS_AS(cfg.apply_override("nope.t=1"), ConfigError);
  CHECK_THROWS_AS(cfg.apply_override("rate.t"), ConfigError);
}

TEST_CASE("config validation") {
  auto invalid = [](const std::string& assignment) {
    RunConfig cfg;
    CHECK_THROWS_AS((cfg.apply_override(assignment), cfg.validate()), ConfigError);
  };
  invalid("rate.epsilons=[0.5,1.5,0.25]");
  invalid("rate.scheme_epsilons=[0.3]");
  invalid("workers=0");
  invalid("format=xml");
  invalid("model.family=\"quartic\"");
  invalid("model.conjugation=\"guess\"");
  CHECK_THROWS_AS(parse_experiment("everything"), ConfigError);
  CHECK(experiment_name(parse_experiment("burago-suite")) == "burago-suite");
}

TEST_CASE("config files") {
  const auto dir = scratch_dir();
  CHECK_THROWS_AS(RunConfig::load((dir / "missing.json").string()), ConfigError);
  std::ofstream(dir / "broken.json") << "{ \"seed\": ";
  CHECK_THROWS_AS(RunConfig::load((dir / "broken.json").string()), ConfigError);
  std::ofstream(dir / "small.json") << R"({"seed": 7, "rate": {"t": 0.5}})";
  const RunConfig cfg = RunConfig::load((dir / "small.json").string());
  CHECK(cfg.seed == 7);
  CHECK(cfg.rate.t == 0.5);
  CHECK(cfg.rate.eval_points == RateBlock{}.eval_points);
  std::filesystem::remove_all(dir);
}

TEST_CASE("report output") {
  const auto dir = scratch_dir();
  Report r;
  r.json = {{"tool", "hjlab"}, {"value", 0.1}};
  r.header = {"a", "b"};
  emit_report(r, "csv", (dir / "empty.csv").string());
  CHECK(slurp(dir / "empty.csv") == "a,b\n");

  r.rows = {{"1", csv_number(0.1)}};
  emit_report(r, "csv", (dir / "one.csv").string());
  CHECK(slurp(dir / "one.csv") == "a,b\n1,0.10000000000000001\n");

  emit_report(r, "json", (dir / "r.json").string());
  CHECK(Json::parse(slurp(dir / "r.json")) == r.json);
  CHECK_THROWS_AS(emit_report(r, "yaml", (dir / "r.yaml").string()), ConfigError);
  CHECK_THROWS_AS(emit_report(r, "json", (dir / "no" / "such" / "r.json").string()), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("defect growth") {
  CHECK(defect_growth({10, 20, 40}, {0.1, 0.105, 0.11}, 0.1, 1e-6).passed);
  const GrowthCheck bad = defect_growth({10, 20}, {0.1, 0.2}, 0.1, 1e-6);
  CHECK_FALSE(bad.passed);
  CHECK(bad.ratio.at(0) == doctest::Approx(2.0));
  CHECK(defect_growth({10, 20}, {1e-9, 8e-7}, 0.1, 1e-6).passed);
}

TEST_CASE("stages are deterministic") {
  RunConfig cfg;
  cfg.checks.model_samples = 200;
  const CheckOutcome a = check_model_stage(cfg);
  const CheckOutcome b = check_model_stage(cfg);
  CHECK(a.passed);
  CHECK(a.detail.dump() == b.detail.dump());

  cfg.sweeps.sub_t = {10, 20};
  cfg.sweeps.speeds = {0.5};
  const CheckOutcome s1 = check_subadditivity_stage(cfg);
  const CheckOutcome s2 = check_subadditivity_stage(cfg);
  CHECK(s1.passed);
  CHECK(s1.detail.dump() == s2.detail.dump());
  CHECK(check_periodicity_stage(cfg).passed);
}

TEST_CASE("rate experiment preconditions") {
  RunConfig cfg;
  cfg.model.dimension = 2;
  CHECK_THROWS_AS(run_rate_experiment(cfg), ConfigError);
  cfg = RunConfig{};
  cfg.rate.epsilons = {0.5, 0.25};
  CHECK_THROWS_AS(run_rate_experiment(cfg), ConfigError);
}
