#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "sparsemix/sweep.hpp"

using namespace sparsemix;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sparsemix_test_" + name);
  fs::remove_all(p);
  return p;
}

SweepSpec small_spec(const fs::path& out) {
  SweepSpec spec;
  spec.dims = {2, 3};
  spec.dilations = {10, 50};
  spec.methods = {Method::Sparse, Method::Baseline};
  spec.replicates = 6;
  spec.seed = 17;
  spec.hyperparams.restarts = 1;
  spec.out_dir = out;
  return spec;
}

}  // namespace

TEST_SUITE("sweep") {

TEST_CASE("config round trip") {
  SweepSpec spec = small_spec("x");
  spec.hyperparams.lambda = 0.75;
  spec.scenario.variances = {1, 2, 3};
  const SweepSpec back = parse_sweep_config(sweep_config_text(spec));
  CHECK(back.dims == spec.dims);
  CHECK(back.dilations == spec.dilations);
  CHECK(back.methods == spec.methods);
  CHECK(back.replicates == 6);
  CHECK(back.seed == 17);
  CHECK(back.hyperparams.lambda == 0.75);
  CHECK_FALSE(back.hyperparams.variance_floor.has_value());
  CHECK(back.scenario.variances == std::vector<double>{1, 2, 3});
  CHECK(sweep_config_text(back) == sweep_config_text(spec));
}

TEST_CASE("config sections are optional and unknown keys are rejected") {
  const SweepSpec s = parse_sweep_config(R"({"sweep": {"replicates": 3}})");
  CHECK(s.replicates == 3);
  CHECK(s.dims == SweepSpec{}.dims);
  CHECK_THROWS_AS(parse_sweep_config(R"({"sweep": {"replicate": 3}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_sweep_config(R"({"extra": {}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_sweep_config(R"({"sweep": {"methods": ["em"]}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_sweep_config("{"), std::invalid_argument);
  CHECK_THROWS_AS(parse_sweep_config(R"({"sweep": {"replicates": "many"}})"), std::invalid_argument);
  const Hyperparams hp = parse_hyperparams_config(R"({"hyperparams": {"lambda": null, "restarts": 2}})");
  CHECK_FALSE(hp.lambda.has_value());
  CHECK(hp.restarts == 2);
}

TEST_CASE("spec validation") {
  SweepSpec spec;
  CHECK_NOTHROW(spec.validate());
  spec.methods.clear();
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = {};
  spec.replicates = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("outputs have the documented shape") {
  const fs::path out = scratch("shape");
  const SweepSpec spec = small_spec(out);
  const SweepResult res = run_sweep(spec);
  write_sweep_outputs(spec, res);
  REQUIRE(res.cells.size() == 8);

  std::istringstream table(slurp(out / "ancrci_sparse.csv"));
  std::string line;
  std::getline(table, line);
  CHECK(line == "dim,dil10[-5:5],dil50[-25:25]");
  int rows = 0;
  while (std::getline(table, line)) ++rows;
  CHECK(rows == 2);

  std::istringstream longform(slurp(out / "replicates.csv"));
  std::getline(longform, line);
  CHECK(line == "dim,dilation,cube_half_width,method,replicate,correct,converged,data_hash");
  std::map<std::string, std::string> hash_by_key;
  int records = 0, paired = 0;
  while (std::getline(longform, line)) {
    ++records;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    REQUIRE(f.size() == 8);
    const std::string key = f[0] + "/" + f[1] + "/" + f[4];
    if (hash_by_key.contains(key)) {
      CHECK(hash_by_key[key] == f[7]);
      ++paired;
    } else {
      hash_by_key[key] = f[7];
    }
  }
  CHECK(records == 2 * 2 * 2 * 6);
  CHECK(paired == 24);
  CHECK(fs::exists(out / "plot" / "baseline_d3_dil50.csv"));
  CHECK_FALSE(fs::exists(out / "timings.csv"));
  const std::string manifest = slurp(out / "manifest.json");
  CHECK(manifest.find("\"rng_version\"") != std::string::npos);
  CHECK(manifest.find("\"software_version\"") != std::string::npos);
}

TEST_CASE("outputs are byte-identical across runs and thread counts") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  SweepSpec spec = small_spec(a);
  write_sweep_outputs(spec, run_sweep(spec));
  spec.out_dir = b;
  spec.jobs = 3;
  write_sweep_outputs(spec, run_sweep(spec));
  for (const char* f : {"ancrci_sparse.csv", "ancrci_baseline.csv", "replicates.csv"})
    CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("timings are opt-in") {
  const fs::path out = scratch("timings");
  SweepSpec spec = small_spec(out);
  spec.dims = {2};
  spec.dilations = {10};
  spec.record_timings = true;
  write_sweep_outputs(spec, run_sweep(spec));
  CHECK(fs::exists(out / "timings.csv"));
}

TEST_CASE("number formatting is shortest round trip") {
  CHECK(format_number(10.0) == "10");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(6.125) == "6.125");
}

}  // TEST_SUITE
