#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "pathslice/gbc.hpp"
#include "test_util.hpp"

using namespace pathslice;
using pathslice::testing::random_curvature;
using pathslice::testing::random_rotation;

namespace {

const double pi = std::numbers::pi;

GridPtr sphere_grid(int nlat, int nlon) {
  return std::make_shared<QuadratureGrid>(QuadratureGrid::sphere_gauss_legendre(ModelManifold::sphere2(), nlat, nlon));
}

}  // namespace

TEST_CASE("Berezin and combinatorial Pfaffians agree on random curvature tensors") {
  std::mt19937_64 rng(1);
  for (int n : {2, 4}) {
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
      const auto r = random_curvature(n, rng);
      const double a = pfaffian_berezin(r), b = pfaffian_combinatorial(r);
      worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
      if (n == 2) CHECK(std::abs(a - r(0, 1, 1, 0)) < 1e-12 * std::max(1.0, std::abs(a)));
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("Pfaffian of the model spaces") {
  std::mt19937_64 rng(2);
  const auto s = ModelManifold::sphere2();
  CHECK(pfaffian_curvature(s, s.random_point(rng)) == doctest::Approx(1.0));
  const auto t = ModelManifold::torus({1.0, 1.0});
  CHECK(pfaffian_curvature(t, t.random_point(rng)) == 0.0);
  const auto ss = ModelManifold::product({s, s});
  CHECK(pfaffian_curvature(ss, ss.random_point(rng)) == doctest::Approx(1.0));
  // Product of Gauss curvatures 1/4 and 1.
  const auto mixed = ModelManifold::product({ModelManifold::sphere2(2.0), s});
  CHECK(pfaffian_curvature(mixed, mixed.random_point(rng)) == doctest::Approx(0.25));
  CHECK(pfaffian_curvature(ModelManifold::product({s, t}), ModelManifold::product({s, t}).random_point(rng)) == 0.0);
}

TEST_CASE("Pfaffian and supertrace are frame invariant") {
  std::mt19937_64 rng(3);
  for (int n : {2, 4}) {
    const auto r = random_curvature(n, rng);
    const auto rot = random_rotation(n, rng);
    CHECK(std::abs(pfaffian_berezin(r.rotated(rot)) - pfaffian_berezin(r)) < 1e-12 * std::max(1.0, pfaffian_berezin(r)));
  }
  const auto ss = ModelManifold::product({ModelManifold::sphere2(), ModelManifold::sphere2()});
  const Point x = ss.random_point(rng);
  const auto m = approximate_K(ss, x, x, 0.1).matrix();
  const auto g = exterior_power(random_rotation(4, rng));
  const FormEndomorphism gi(4, g.matrix().inverse());
  CHECK(std::abs(supertrace(g * m * gi) - supertrace(m)) < 1e-10);
}

TEST_CASE("Gauss-Bonnet integral of the Pfaffian on a sphere grid") {
  const auto g = sphere_grid(16, 32);
  double sum = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) sum += g->weight(i) * pfaffian_curvature(g->manifold(), g->point(i));
  CHECK(sum / (2 * pi) == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("transport fields have vanishing diagonal supertrace") {
  const auto g = sphere_grid(8, 16);
  for (auto kind : {FieldKind::Transport, FieldKind::GaussianTransport}) {
    const auto f = supertrace_diagonal(make_field(g, 0.1, kind));
    for (double v : f.values) CHECK(std::abs(v) < 1e-12);
  }
}

TEST_CASE("closed-form small-t supertrace limit") {
  std::mt19937_64 rng(4);
  const std::vector<double> ts{0.04, 0.02, 0.01, 0.005};
  const auto s = ModelManifold::sphere2();
  const auto a = gbc_limit_scan(s, s.random_point(rng), ts);
  CHECK(a.target == doctest::Approx(1.0 / (2 * pi)));
  CHECK(a.deviation < 1e-10);
  const auto t = ModelManifold::torus({1.0, 1.0});
  const auto b = gbc_limit_scan(t, t.random_point(rng), ts);
  CHECK(std::abs(b.limit) < 1e-10);
  const auto ss = ModelManifold::product({s, s});
  const auto c = gbc_limit_scan(ss, ss.random_point(rng), ts);
  CHECK(c.target == doctest::Approx(1.0 / (4 * pi * pi)));
  CHECK(c.deviation < 1e-10);
  CHECK_THROWS(gbc_limit_scan(s, s.random_point(rng), {0.1}));
}

TEST_CASE("Euler characteristic estimates") {
  CHECK(euler_characteristic_exact(ModelManifold::sphere2()) == 2);
  CHECK(euler_characteristic_exact(ModelManifold::torus({1.0, 1.0})) == 0);
  const auto s = ModelManifold::sphere2();
  CHECK(euler_characteristic_exact(ModelManifold::product({s, s})) == 4);
  CHECK(euler_characteristic_exact(ModelManifold::product({s, ModelManifold::torus({1.0, 1.0})})) == 0);

  const auto tg = std::make_shared<QuadratureGrid>(
      QuadratureGrid::torus_uniform(ModelManifold::torus({2 * pi, 2 * pi}), 16));
  CHECK(std::abs(euler_characteristic_estimate(tg, 0.2, 1)) < 1e-10);

  const auto sg = sphere_grid(16, 32);
  const double chi = euler_characteristic_estimate(sg, 0.2, 1);
  CHECK(std::abs(chi - 2.0) < 0.1);
  CHECK(euler_characteristic_factorized({sg, sg}, 0.2, 1) == doctest::Approx(chi * chi));
}

TEST_CASE("product kernel factorizes into the Kronecker product of factor kernels") {
  std::mt19937_64 rng(5);
  const auto s = ModelManifold::sphere2();
  const auto m = ModelManifold::product({s, s});
  std::vector<std::pair<Point, Point>> pairs;
  for (int i = 0; i < 20; ++i) {
    const Point y = m.random_point(rng);
    pairs.emplace_back(m.exp_map(y, Tangent::Random(4) * 0.3), y);
  }
  CHECK(product_kernel_defect(m, pairs, 0.1) < 1e-12);
}

TEST_CASE("error supertrace report") {
  const auto g = sphere_grid(16, 32);
  const auto r = error_supertrace_decay(g, {0.1, 0.2}, 1);
  REQUIRE(r.t.size() == 2);
  REQUIRE(r.max_abs_str.size() == 2);
  for (double v : r.integral) CHECK(std::abs(v) < 0.05);
  CHECK(std::isfinite(r.exponent));
}
