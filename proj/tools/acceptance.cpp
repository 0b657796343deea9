// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "pathslice/app.hpp"
#include "pathslice/gbc.hpp"
#include "pathslice/parallel.hpp"

namespace fs = std::filesystem;
using namespace pathslice;
using app::ExperimentReport;
using app::RunConfig;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Adds every check of an experiment whose name starts with one of the prefixes.
void take_checks(Outcome& o, const ExperimentReport& rep, const std::vector<std::string>& prefixes) {
  int found = 0;
  for (const auto& c : rep.checks())
    for (const auto& p : prefixes)
      if (c.name.rfind(p, 0) == 0) {
        o.require(c.pass, c.name + " " + fmt(c.value) + " " + c.relation + " " + fmt(c.bound));
        ++found;
        break;
      }
  if (found == 0) o.require(false, rep.name() + ": no matching checks");
}

class Cache {
 public:
  Cache(fs::path configs, fs::path out) : configs_(std::move(configs)), out_(std::move(out)) {}

  RunConfig config(const std::string& file) const { return app::load_config(configs_ / file); }

  const ExperimentReport& run(const std::string& experiment, const std::string& file) {
    const std::string key = experiment + "/" + file;
    auto it = reports_.find(key);
    if (it == reports_.end()) {
      const fs::path dir = out_ / (fs::path(file).stem().string() + "_" + experiment);
      it = reports_.emplace(key, app::run_experiment(experiment, config(file), dir)).first;
    }
    return it->second;
  }

 private:
  fs::path configs_, out_;
  std::map<std::string, ExperimentReport> reports_;
};

FormEndomorphism random_endomorphism(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  FormEndomorphism e(n);
  for (int d = 0; d <= n; ++d) {
    const int s = binomial(n, d);
    Eigen::MatrixXd b(s, s);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) b(i, j) = g(rng);
    e.set_sector(d, b);
  }
  return e;
}

Outcome supertrace_identity() {
  Outcome o;
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto e = random_endomorphism(trial % 2 ? 4 : 2, rng);
    const double scale = std::max(1.0, e.matrix().cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(supertrace(e) - supertrace_berezin(e)) / scale);
  }
  o.require(worst <= 1e-12, "max relative difference " + fmt(worst) + " <= 1e-12 over 1000 samples");
  return o;
}

Outcome flat_exactness(double epsilon) {
  Outcome o;
  const auto m = ModelManifold::torus({2 * std::numbers::pi, 2 * std::numbers::pi});
  std::mt19937_64 rng(7);
  double pointwise = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const Point y = m.random_point(rng);
    const Point x = m.exp_map(y, Tangent::Random(2) * 1.5);
    for (double t : {0.05, 0.1, 0.2}) {
      const double h = gaussian_H(m, x, y, t);
      if (h == 0.0) continue;
      const Eigen::MatrixXd k = approximate_K(m, x, y, t).matrix().matrix();
      pointwise = std::max(pointwise, (k - h * Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() / h);
    }
  }
  o.require(pointwise <= 1e-14, "K = H x identity to " + fmt(pointwise));

  const GridPtr g = std::make_shared<const QuadratureGrid>(QuadratureGrid::torus_uniform(m, 64));
  const auto k1 = make_field(g, 0.025, FieldKind::Approximate);
  const auto k2 = make_field(g, 0.05, FieldKind::Approximate);
  const auto k4 = make_field(g, 0.1, FieldKind::Approximate);
  const auto f1 = star_product(k1, k1);
  const double sg05 = kernel_norm_t(f1 - k2, KernelNormParams(1.0, epsilon, 0.05));
  const auto f2 = star_product(k2, k2);
  const double sg10 = kernel_norm_t(f2 - k4, KernelNormParams(1.0, epsilon, 0.1));
  const double ref12 = kernel_norm_t(star_product(f1, f1) - f2, KernelNormParams(1.0, epsilon, 0.1));
  o.require(sg05 < 1e-8, "semigroup defect t=0.05 " + fmt(sg05));
  o.require(sg10 < 1e-8, "semigroup defect t=0.1 (refinement depth 0->1) " + fmt(sg10));
  o.require(ref12 < 1e-8, "refinement depth 1->2 at t=0.1 " + fmt(ref12));
  return o;
}

Outcome torus_euler() {
  Outcome o;
  const auto m = ModelManifold::torus({2 * std::numbers::pi, 2 * std::numbers::pi});
  const GridPtr g = std::make_shared<const QuadratureGrid>(QuadratureGrid::torus_uniform(m, 64));
  double worst = 0.0;
  for (double t : {0.05, 0.1}) worst = std::max(worst, std::abs(euler_characteristic_estimate(g, t, 1)));
  o.require(worst <= 1e-10, "chi(T2) = 0 +- " + fmt(worst));
  std::mt19937_64 rng(1);
  const auto scan = gbc_limit_scan(m, m.random_point(rng), {0.04, 0.02, 0.01, 0.005});
  o.require(std::abs(scan.limit) < 1e-10, "torus closed-form limit " + fmt(scan.limit));
  return o;
}

std::map<std::string, std::string> read_csvs(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.path().extension() == ".csv") {
      std::ifstream in(e.path(), std::ios::binary);
      out[fs::relative(e.path(), dir).string()] =
          std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
  return out;
}

Outcome determinism(const fs::path& out) {
  Outcome o;
  auto cfg = app::parse_config(app::json::parse(R"({
    "manifold": {"type": "sphere2"}, "grid": {"type": "gauss_legendre", "nlat": 16, "nlon": 32},
    "t_list": [0.1, 0.2], "depths": [0, 1], "refine_t": 0.2, "min_slice": 0.05, "samples": 100, "seed": 11})"));
  std::map<int, std::map<std::string, std::string>> csv;
  for (int threads : {1, 8}) {
    set_num_threads(threads);
    const fs::path dir = out / ("determinism_threads_" + std::to_string(threads));
    fs::remove_all(dir);
    for (const char* e : {"semigroup", "converge", "norms"}) app::run_experiment(e, cfg, dir / e);
    csv[threads] = read_csvs(dir);
  }
  set_num_threads(1);
  o.require(!csv[1].empty(), std::to_string(csv[1].size()) + " CSV files written");
  o.require(csv[1] == csv[8], "CSV bytes identical for threads 1 and 8");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Acceptance criteria"};
  std::string configs = PATHSLICE_SOURCE_DIR "/configs", out = "acceptance_out";
  std::vector<int> only;
  cli.add_option("--configs", configs, "directory with sphere.json and s2xs2.json")->check(CLI::ExistingDirectory);
  cli.add_option("--out", out, "output directory");
  cli.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(cli, argc, argv);

  Cache cache(configs, out);
  const double eps = cache.config("sphere.json").epsilon;
  std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, [] { return supertrace_identity(); }},
      {2, [&] { return flat_exactness(eps); }},
      {3,
       [&] {
         Outcome o;
         take_checks(o, cache.run("geom", "sphere.json"),
                     {"leading RNC coefficients", "g remainder", "ginv remainder", "gamma remainder", "pt remainder"});
         return o;
       }},
      {4,
       [&] {
         Outcome o;
         take_checks(o, cache.run("residual", "sphere.json"), {"heat residual exponent", "Ricci-ablated control"});
         return o;
       }},
      {5,
       [&] {
         Outcome o;
         take_checks(o, cache.run("semigroup", "sphere.json"), {"semigroup defect slope"});
         return o;
       }},
      {6,
       [&] {
         Outcome o;
         take_checks(o, cache.run("converge", "sphere.json"),
                     {"successive differences", "refinement log2 slope", "deepest product vs K"});
         return o;
       }},
      {7,
       [&] {
         Outcome o;
         take_checks(o, cache.run("gbc", "sphere.json"), {"closed-form", "Euler characteristic estimate"});
         const Outcome t = torus_euler();
         o.require(t.pass, t.detail);
         take_checks(o, cache.run("gbc", "s2xs2.json"), {"closed-form", "Euler characteristic estimate"});
         return o;
       }},
      {8,
       [&] {
         Outcome o;
         take_checks(o, cache.run("gbc", "sphere.json"), {"t-independence"});
         return o;
       }},
      {9, [&] { return determinism(out); }},
  };

  bool all = true;
  for (auto& [id, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s (%.1f s) %s\n", id, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
