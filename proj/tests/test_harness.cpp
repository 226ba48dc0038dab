#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oed/errors.hpp"
#include "oed/harness.hpp"

using namespace oed;

namespace {

std::string small_scenario_json(const std::string& out_dir) {
  return R"({
    "name": "smoke",
    "generate": {"kind": "iid", "sigma2": 9.0},
    "analysis": {"family": "iid", "scale": "profile"},
    "design": {"source": "even"},
    "ns": 11,
    "replicates": 4,
    "seed": 42,
    "fit": {"restarts": 8},
    "output": ")" + out_dir + R"("
  })";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config validation diagnostics") {
  CHECK_THROWS_AS(parse_scenario_json("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_scenario_json(R"({"analysis": {}})"), ConfigError);

  // missing generate
  CHECK_THROWS_WITH_AS(
      parse_scenario_json(R"({"analysis": {"family":"iid","scale":"profile"}})"),
      doctest::Contains("generate"), ConfigError);

  // bad noise kind
  CHECK_THROWS_WITH_AS(parse_scenario_json(R"({
      "generate": {"kind": "white", "sigma2": 1.0},
      "analysis": {"family": "iid", "scale": "profile"}})"),
                       doctest::Contains("generate.kind"), ConfigError);

  // unsupported misspecification direction: IID data analyzed as OU
  CHECK_THROWS_WITH_AS(parse_scenario_json(R"({
      "generate": {"kind": "iid", "sigma2": 1.0},
      "analysis": {"family": "ou", "phi": 0.1, "scale": "profile"}})"),
                       doctest::Contains("misspecification"), ConfigError);

  // phi must match between generation and analysis
  CHECK_THROWS_WITH_AS(parse_scenario_json(R"({
      "generate": {"kind": "ou", "phi": 0.02, "sigma2_ou": 0.36},
      "analysis": {"family": "ou", "phi": 0.1, "scale": "profile"}})"),
                       doctest::Contains("phi"), ConfigError);

  // ns sweep values must be integers
  CHECK_THROWS_WITH_AS(parse_scenario_json(R"({
      "generate": {"kind": "iid", "sigma2": 1.0},
      "analysis": {"family": "iid", "scale": "profile"},
      "sweep": {"axis": "ns", "values": [3.5]}})"),
                       doctest::Contains("sweep.values"), ConfigError);
}

TEST_CASE("misspecified OU-to-IID config is accepted") {
  const Scenario s = parse_scenario_json(R"({
      "generate": {"kind": "ou", "phi": 0.02, "sigma2_ou": 0.36},
      "analysis": {"family": "iid", "scale": {"fixed": 9.0}}})");
  CHECK(s.analysis.family == NoiseSpec::Family::iid);
  CHECK(s.analysis.scale_mode == NoiseSpec::ScaleMode::fixed);
  CHECK(s.analysis.fixed_scale == 9.0);
  CHECK(is_ou(s.generate));
}

TEST_CASE("scenario run is deterministic byte for byte") {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "oed_harness_test";
  fs::remove_all(base);
  const std::string dir_a = (base / "a").string();
  const std::string dir_b = (base / "b").string();

  const Scenario sa = parse_scenario_json(small_scenario_json(dir_a));
  const Scenario sb = parse_scenario_json(small_scenario_json(dir_b));
  const SweepResult ra = run_scenario(sa);
  const SweepResult rb = run_scenario(sb);

  REQUIRE(ra.points.size() == 1);
  CHECK(ra.points[0].params[0].total == 4);

  CHECK(slurp(fs::path(dir_a) / "replicates.csv") == slurp(fs::path(dir_b) / "replicates.csv"));
  CHECK(slurp(fs::path(dir_a) / "designs.csv") == slurp(fs::path(dir_b) / "designs.csv"));

  // summaries differ only in the echoed output path; check the points block
  const std::string sum_a = slurp(fs::path(dir_a) / "summary.json");
  const std::string sum_b = slurp(fs::path(dir_b) / "summary.json");
  const auto tail = [](const std::string& s) { return s.substr(s.find("\"points\"")); };
  CHECK(tail(sum_a) == tail(sum_b));

  // rerun into the same directory: byte-identical files
  const SweepResult ra2 = run_scenario(sa);
  CHECK(slurp(fs::path(dir_a) / "replicates.csv") == slurp(fs::path(dir_b) / "replicates.csv"));
  CHECK(ra2.points[0].params[1].mean_width ==
        doctest::Approx(ra.points[0].params[1].mean_width).epsilon(0));
  fs::remove_all(base);
}

TEST_CASE("threaded and serial runs agree") {
  const Scenario s = parse_scenario_json(R"({
      "name": "threads",
      "generate": {"kind": "iid", "sigma2": 4.0},
      "analysis": {"family": "iid", "scale": "profile"},
      "design": {"source": "even"},
      "ns": 7,
      "replicates": 6,
      "seed": 7,
      "fit": {"restarts": 6}})");
  RunOverrides serial;
  serial.threads = 1;
  RunOverrides threaded;
  threaded.threads = 4;
  const SweepResult a = run_scenario(s, serial);
  const SweepResult b = run_scenario(s, threaded);
  for (int i = 0; i < 3; ++i) {
    CHECK(a.points[0].params[static_cast<size_t>(i)].mean_width ==
          doctest::Approx(b.points[0].params[static_cast<size_t>(i)].mean_width).epsilon(0));
    CHECK(a.points[0].params[static_cast<size_t>(i)].closed ==
          b.points[0].params[static_cast<size_t>(i)].closed);
  }
}

TEST_CASE("explicit rows resolve to one axis point each") {
  const Scenario s = parse_scenario_json(R"({
      "name": "rows",
      "generate": {"kind": "iid", "sigma2": 0.64},
      "analysis": {"family": "iid", "scale": "profile"},
      "design": {"source": "explicit",
                 "times": [[0, 20, 40, 60, 80], [0, 20, 40, 60, 64, 80]]},
      "replicates": 2,
      "seed": 3,
      "fit": {"restarts": 6}})");
  const SweepResult r = run_s3_perturbation(s);
  REQUIRE(r.points.size() == 2);
  CHECK(r.points[0].axis_value == 5);
  CHECK(r.points[1].axis_value == 6);
  CHECK(r.points[1].design_times.size() == 6);
}

TEST_CASE("observation CSV round trip") {
  const TimeGrid grid{0.0, 8.0, 16.0};
  Eigen::VectorXd v(3);
  v << 4.5, 9.25, 17.125;
  const Observations obs(grid, v);
  std::stringstream ss;
  write_observations_csv(ss, obs);
  const Observations back = read_observations_csv(ss);
  CHECK((back.grid.times() - grid.times()).norm() == 0.0);
  CHECK((back.values - v).norm() == 0.0);
}

}  // TEST_SUITE
