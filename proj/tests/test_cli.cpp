#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ctrllab/config.hpp"
#include "ctrllab/csv.hpp"
#include "ctrllab/runner.hpp"
#include "doctest.h"

using namespace ctrllab;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("ctrllab_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// small, fast configuration for end-to-end runs
ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.grid.n = {48, 3};
  c.time.steps = 24;
  c.flow.dt_flow = 5e-3;
  c.beam_bzk.grid_n = {160, 3};
  c.beam_bzk.time_steps = 24;
  c.beam_bzk.quad_order = 48;
  c.sweeps.eps = {0.02, 0.01, 0.005, 0.0025};
  c.carleman.suite_size = 3;
  c.carleman.grid_n = {48, 3};
  c.carleman.time_steps = 24;
  return c;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char ch : s) n += ch == '\n';
  return n;
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("csv formatting contract") {
  CsvWriter w({"a", "b"});
  w.row_values({1.0 / 3.0, 1e-12});
  w.row({"x,y", "he said \"hi\""});
  CHECK(w.text() ==
        "a,b\n0.333333333333,1e-12\n\"x,y\",\"he said \"\"hi\"\"\"\n");
  CHECK_THROWS(w.row({"only-one"}));
}

TEST_CASE("config parse, validate, and field errors") {
  CHECK_THROWS_AS(parse_config("{nope"), ConfigError);
  ExperimentConfig c = parse_config(R"({"grid":{"dim":1,"n":[2]},
    "weights":{"lambda":0.5}, "sweeps":{"beta":[1e-4, 1e-4]}})");
  auto issues = c.validate();
  REQUIRE(!issues.empty());
  bool saw_grid = false, saw_lambda = false, saw_beta = false;
  for (const auto& m : issues) {
    saw_grid |= m.find("grid.n[0]") != std::string::npos;
    saw_lambda |= m.find("weights.lambda") != std::string::npos;
    saw_beta |= m.find("sweeps.beta") != std::string::npos;
  }
  CHECK(saw_grid);
  CHECK(saw_lambda);
  CHECK(saw_beta);
}

TEST_CASE("config round trip is stable") {
  ExperimentConfig c = default_config();
  c.equation = "bbm";
  c.sweeps.h = {0.1, 0.05};
  std::string once = serialize_config(c);
  std::string twice = serialize_config(parse_config(once));
  CHECK(once == twice);
}

TEST_CASE("flow-check family reports the static-region failure") {
  ExperimentConfig c = tiny_config();
  c.flow.kind = "zero";
  fs::path out = fresh_dir("flowzero");
  RunManifest m = run_experiments(c, {"flow-check"}, out);
  CHECK(m.failures.empty());
  REQUIRE(m.outputs.at("flow-check").size() == 1);
  std::string csv = read_file(out / "flow_check.csv");
  CHECK(csv.find("covers,0") != std::string::npos);
  CHECK(csv.find("no_avoiding_path,0") != std::string::npos);
  CHECK(fs::exists(out / "manifest.json"));
  for (const auto& [fam, files] : m.outputs)
    for (const auto& f : files) CHECK(fs::exists(out / f));
}

TEST_CASE("beam sweep csv has one row per parameter plus the slope footer") {
  ExperimentConfig c = tiny_config();
  fs::path out = fresh_dir("beamshape");
  RunManifest m = run_experiments(c, {"beam-bzk"}, out);
  REQUIRE(m.failures.empty());
  std::string csv = read_file(out / "beam_bzk.csv");
  CHECK(count_lines(csv) == 1 + 4 + 1);  // header, data, footer
  CHECK(csv.rfind("slope,") != std::string::npos);
  CHECK(csv.substr(0, 6) == "param,");
}

TEST_CASE("identical configuration and seed give identical bytes") {
  ExperimentConfig c = tiny_config();
  fs::path out1 = fresh_dir("det1");
  fs::path out2 = fresh_dir("det2");
  std::vector<std::string> fams{"flow-check", "weights-check", "beam-bzk",
                                "carleman"};
  RunManifest m1 = run_experiments(c, fams, out1);
  RunManifest m2 = run_experiments(c, fams, out2);
  REQUIRE(m1.failures.empty());
  for (const auto& fam : fams)
    for (const auto& f : m1.outputs.at(fam))
      CHECK(read_file(out1 / f) == read_file(out2 / f));
}

TEST_CASE("unknown family is rejected up front") {
  ExperimentConfig c = tiny_config();
  CHECK_THROWS_AS(run_experiments(c, {"nonsense"}, fresh_dir("badfam")),
                  ConfigError);
}

TEST_CASE("binary end-to-end: exit codes and outputs") {
  fs::path dir = fresh_dir("bin");
  fs::path cfg = dir / "cfg.json";
  {
    ExperimentConfig c = tiny_config();
    c.flow.kind = "zero";
    std::ofstream os(cfg);
    os << serialize_config(c);
  }
  std::string bin = std::string(CTRLLAB_BINARY_DIR) + "/ctrllab";
  std::string cmd = bin + " run --config " + cfg.string() + " --only flow-check --out " +
                    (dir / "out").string() + " >/dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(dir / "out" / "flow_check.csv"));

  // invalid configuration: exit code 1
  fs::path bad = dir / "bad.json";
  std::ofstream(bad) << R"({"time":{"steps":0}})";
  std::string cmd_bad = bin + " run --config " + bad.string() + " >/dev/null 2>&1";
  int rc = std::system(cmd_bad.c_str());
  CHECK(WEXITSTATUS(rc) == 1);
}

TEST_SUITE_END();
