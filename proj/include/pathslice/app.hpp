#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pathslice/geometry.hpp"
#include "pathslice/kernels.hpp"
#include "pathslice/pathintegral.hpp"

namespace pathslice::app {

using json = nlohmann::json;

// Invalid configuration; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridSpec {
  std::string type;  // uniform | gauss_legendre | fibonacci | product
  int per_side = 64;
  int nlat = 32, nlon = 64;
  int count = 2000;
  std::vector<GridSpec> factors;
};

struct RunConfig {
  json manifold_json;
  ModelManifold manifold = ModelManifold::torus({1.0, 1.0});
  GridSpec grid;
  double epsilon = 0.25;
  double cutoff_c = 6.0;
  double fd_delta = 0.05;
  double dt_delta = 0.05;
  std::optional<std::vector<double>> t_list;  // experiment default when absent
  std::vector<int> depths{0, 1, 2, 3};
  double refine_t = 0.1;
  double min_slice = 0.0125;  // smallest slice the grid resolves
  std::vector<double> d_list{1.0};
  int samples = 200;
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  KernelOptions kernel_options(bool ricci = true) const;
  HeatOperatorParams heat_params() const { return HeatOperatorParams(fd_delta, dt_delta); }
};

ModelManifold parse_manifold(const json& j);
GridSpec parse_grid(const json& j, const ModelManifold& m);
RunConfig parse_config(const json& j);
RunConfig load_config(const std::filesystem::path& path);
GridPtr build_grid(const GridSpec& spec, const ModelManifold& m);
json grid_json(const GridSpec& spec);

// CSV with a mandatory header; doubles printed with 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  CsvWriter& operator<<(const std::string& s);
  CsvWriter& operator<<(const char* s) { return *this << std::string(s); }
  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(int v);
  void end_row();

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

std::string format_double(double v);

struct Check {
  std::string name;
  double value;
  std::string relation;  // ">=", "<=", "<"
  double bound;
  bool pass;
};

class ExperimentReport {
 public:
  explicit ExperimentReport(std::string name) : name_(std::move(name)) {}
  void check(const std::string& name, double value, const std::string& relation, double bound);
  json& summary() { return summary_; }
  bool pass() const;
  const std::vector<Check>& checks() const { return checks_; }
  const std::string& name() const { return name_; }
  void write(const std::filesystem::path& dir) const;

 private:
  std::string name_;
  std::vector<Check> checks_;
  json summary_ = json::object();
};

const std::vector<std::string>& experiment_names();
ExperimentReport run_experiment(const std::string& name, const RunConfig& cfg, const std::filesystem::path& out_dir);

// Largest dyadic depth with t / 2^depth >= min_slice.
int resolvable_depth(double t, double min_slice);

}  // namespace pathslice::app
