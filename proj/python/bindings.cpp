#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pathslice/app.hpp"
#include "pathslice/gbc.hpp"
#include "pathslice/parallel.hpp"

namespace py = pybind11;
using namespace pathslice;

namespace {

struct Grid {
  GridPtr ptr;
};

FormEndomorphism to_endomorphism(const Eigen::MatrixXd& m) {
  int n = 0;
  while ((1 << n) < m.rows()) ++n;
  if ((1 << n) != m.rows() || m.rows() != m.cols()) throw std::invalid_argument("matrix must be 2^n x 2^n");
  return FormEndomorphism(n, m);
}

KernelOptions options(bool ricci, double cutoff_c) { return KernelOptions{cutoff_c, ricci}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Time-sliced supersymmetric path integral kernels and diagnostics";
  py::register_exception<app::ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<ModelManifold>(m, "Manifold")
      .def_static("torus", &ModelManifold::torus, py::arg("lengths"))
      .def_static("sphere2", &ModelManifold::sphere2, py::arg("radius") = 1.0)
      .def_static("product", &ModelManifold::product, py::arg("factors"))
      .def_property_readonly("dim", &ModelManifold::dim)
      .def_property_readonly("ambient_dim", &ModelManifold::ambient_dim)
      .def_property_readonly("name", &ModelManifold::name)
      .def_property_readonly("is_flat", &ModelManifold::is_flat)
      .def("injectivity_radius", &ModelManifold::injectivity_radius)
      .def("volume", &ModelManifold::volume)
      .def("distance", &ModelManifold::distance)
      .def("exp_map", &ModelManifold::exp_map)
      .def("log_map", &ModelManifold::log_map)
      .def("parallel_transport", &ModelManifold::parallel_transport, py::arg("source"), py::arg("target"))
      .def("scalar_curvature", [](const ModelManifold& mf, const Point& y) { return mf.curvature(y).scalar; })
      .def("random_point", [](const ModelManifold& mf, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return mf.random_point(rng);
      });

  py::class_<Grid>(m, "Grid")
      .def_static("torus_uniform",
                  [](const ModelManifold& mf, int n) {
                    return Grid{std::make_shared<const QuadratureGrid>(QuadratureGrid::torus_uniform(mf, n))};
                  })
      .def_static("gauss_legendre",
                  [](const ModelManifold& mf, int nlat, int nlon) {
                    return Grid{std::make_shared<const QuadratureGrid>(
                        QuadratureGrid::sphere_gauss_legendre(mf, nlat, nlon))};
                  })
      .def_static("fibonacci",
                  [](const ModelManifold& mf, int count) {
                    return Grid{
                        std::make_shared<const QuadratureGrid>(QuadratureGrid::sphere_fibonacci(mf, count))};
                  })
      .def("__len__", [](const Grid& g) { return g.ptr->size(); })
      .def_property_readonly("weights", [](const Grid& g) { return g.ptr->weights(); })
      .def("point", [](const Grid& g, std::size_t i) { return g.ptr->point(i); })
      .def("total_weight", [](const Grid& g) { return g.ptr->total_weight(); });

  m.def("supertrace", [](const Eigen::MatrixXd& e) { return supertrace(to_endomorphism(e)); });
  m.def("supertrace_berezin", [](const Eigen::MatrixXd& e) { return supertrace_berezin(to_endomorphism(e)); });
  m.def(
      "t_norm",
      [](const Eigen::MatrixXd& e, double epsilon, double t) {
        return t_norm(to_endomorphism(e), TNormParams(epsilon, t));
      },
      py::arg("matrix"), py::arg("epsilon"), py::arg("t"));

  m.def(
      "approximate_kernel",
      [](const ModelManifold& mf, const Point& x, const Point& y, double t, bool ricci, double cutoff_c) {
        return approximate_K(mf, x, y, t, options(ricci, cutoff_c)).matrix().matrix();
      },
      py::arg("manifold"), py::arg("x"), py::arg("y"), py::arg("t"), py::arg("ricci") = true,
      py::arg("cutoff_c") = 6.0);
  m.def("pfaffian_curvature", &pfaffian_curvature);
  m.def(
      "gbc_limit_scan",
      [](const ModelManifold& mf, const Point& x, const std::vector<double>& ts) {
        const GbcScan s = gbc_limit_scan(mf, x, ts);
        py::dict d;
        d["t"] = s.t;
        d["closed"] = s.closed;
        d["limit"] = s.limit;
        d["target"] = s.target;
        d["deviation"] = s.deviation;
        return d;
      },
      py::arg("manifold"), py::arg("x"), py::arg("ts"));
  m.def(
      "euler_characteristic_estimate",
      [](const Grid& g, double t, int depth) { return euler_characteristic_estimate(g.ptr, t, depth); },
      py::arg("grid"), py::arg("t"), py::arg("depth"));
  m.def(
      "semigroup_defect",
      [](const Grid& g, double t1, double t2, double D, double epsilon) {
        return semigroup_defect(g.ptr, t1, t2, KernelNormParams(D, epsilon, t1 + t2));
      },
      py::arg("grid"), py::arg("t1"), py::arg("t2"), py::arg("D") = 1.0, py::arg("epsilon") = 0.25);
  m.def("set_num_threads", &set_num_threads);
  m.def(
      "run_experiment",
      [](const std::string& name, const std::string& config_path, const std::string& out_dir) {
        const app::RunConfig cfg = app::load_config(config_path);
        const app::ExperimentReport rep = app::run_experiment(name, cfg, out_dir);
        py::list checks;
        for (const auto& c : rep.checks()) {
          py::dict d;
          d["name"] = c.name;
          d["value"] = c.value;
          d["relation"] = c.relation;
          d["bound"] = c.bound;
          d["pass"] = c.pass;
          checks.append(d);
        }
        py::dict out;
        out["pass"] = rep.pass();
        out["checks"] = checks;
        return out;
      },
      py::arg("name"), py::arg("config"), py::arg("out_dir"));
}
