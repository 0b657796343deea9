#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pathslice/app.hpp"

using namespace pathslice;
using namespace pathslice::app;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("pathslice_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("configuration parsing and defaults") {
  const auto c = parse_config(json::parse(R"({"manifold": {"type": "sphere2"}})"));
  CHECK(c.manifold.dim() == 2);
  CHECK(c.grid.type == "gauss_legendre");
  CHECK(c.epsilon == 0.25);
  CHECK_FALSE(c.t_list.has_value());

  const auto t = parse_config(json::parse(
      R"({"manifold": {"type": "torus", "lengths": [1, 2]}, "grid": {"type": "uniform", "per_side": 8},
          "t_list": [0.1, 0.2], "depths": [0, 1], "seed": 7})"));
  CHECK(t.grid.per_side == 8);
  CHECK(t.t_list->size() == 2);
  CHECK(t.seed == 7);
  CHECK(build_grid(t.grid, t.manifold)->size() == 64);

  const auto p = parse_config(json::parse(
      R"({"manifold": {"type": "product", "factors": [{"type": "sphere2"}, {"type": "sphere2"}]}})"));
  CHECK(p.manifold.dim() == 4);
  CHECK(p.grid.type == "product");
  CHECK(p.grid.factors.size() == 2);
}

TEST_CASE("invalid configurations are rejected with a ConfigError") {
  auto bad = [](const char* text) { return parse_config(json::parse(text)); };
  try {
    bad(R"({"manifold": {"type": "sphere2"}, "epsilon": 0.7})");
    FAIL("epsilon = 0.7 was accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("0 < epsilon < 1/2") != std::string::npos);
  }
  CHECK_THROWS_AS(bad(R"({"manifold": {"type": "sphere2"}, "epsilon": 0})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"manifold": {"type": "sphere2"}, "unknown": 1})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"manifold": {"type": "klein"}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"manifold": {"type": "torus", "lengths": [1, -1]}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"manifold": {"type": "sphere2"}, "t_list": [0.1, -0.1]})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"manifold": {"type": "sphere2"}, "depths": [-1]})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"manifold": {"type": "sphere2"}, "grid": {"type": "uniform"}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"grid": {"type": "uniform"}})"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("shipped configurations parse") {
  for (const char* name : {"sphere.json", "torus.json", "s2xs2.json"})
    CHECK_NOTHROW(load_config(fs::path(PATHSLICE_SOURCE_DIR) / "configs" / name));
  CHECK_THROWS_AS(load_config(fs::path(PATHSLICE_SOURCE_DIR) / "configs" / "bad_epsilon.json"), ConfigError);
}

TEST_CASE("CSV output has a header and 17 significant digits") {
  const fs::path d = scratch_dir("csv");
  {
    CsvWriter w(d / "a.csv", {"name", "value", "count"});
    w << "x" << 0.1 << 3;
    w.end_row();
  }
  CHECK(read_file(d / "a.csv") == "name,value,count\nx,0.10000000000000001,3\n");
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
  CsvWriter w(d / "b.csv", {"a", "b"});
  w << 1.0;
  CHECK_THROWS(w.end_row());
}

TEST_CASE("experiment reports") {
  ExperimentReport r("demo");
  r.check("small", 1e-12, "<", 1e-10);
  r.check("slope", 1.2, ">=", 1.0);
  CHECK(r.pass());
  r.check("bound", 2.0, "<=", 1.0);
  CHECK_FALSE(r.pass());
  const fs::path d = scratch_dir("report");
  r.write(d);
  const json j = json::parse(read_file(d / "demo_summary.json"));
  CHECK(j.dump().find("bound") != std::string::npos);
}

TEST_CASE("resolvable depth") {
  CHECK(resolvable_depth(0.1, 0.0125) == 3);
  CHECK(resolvable_depth(0.02, 0.0125) == 0);
  CHECK(resolvable_depth(0.2, 0.0125) == 4);
}

TEST_CASE("norms experiment runs end to end on a small torus") {
  auto c = parse_config(json::parse(
      R"({"manifold": {"type": "torus", "lengths": [6.283185307179586, 6.283185307179586]},
          "grid": {"type": "uniform", "per_side": 16}, "samples": 50})"));
  const fs::path d = scratch_dir("norms");
  const auto rep = run_experiment("norms", c, d);
  CHECK(rep.pass());
  CHECK(fs::exists(d / "norms_summary.json"));
  CHECK_THROWS(run_experiment("nope", c, d));
}
