#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "pathslice/fit.hpp"
#include "pathslice/parallel.hpp"
#include "pathslice/pathintegral.hpp"

using namespace pathslice;

namespace {

const double pi = std::numbers::pi;

GridPtr torus_grid(int n) {
  return std::make_shared<QuadratureGrid>(
      QuadratureGrid::torus_uniform(ModelManifold::torus({2 * pi, 2 * pi}), n));
}

GridPtr sphere_grid(int nlat, int nlon) {
  return std::make_shared<QuadratureGrid>(QuadratureGrid::sphere_gauss_legendre(ModelManifold::sphere2(), nlat, nlon));
}

// Largest entry over all planes of a field.
double max_entry(const KernelField& f) {
  const int n = f.dim();
  double m = 0.0;
  for (int d = 0; d <= n; ++d)
    for (int a = 0; a < binomial(n, d); ++a)
      for (int b = 0; b < binomial(n, d); ++b)
        if (f.has_plane(d, a, b)) m = std::max(m, f.plane(d, a, b).cwiseAbs().maxCoeff());
  return m;
}

double rel_diff(const KernelField& a, const KernelField& b) { return max_entry(a - b) / max_entry(a); }

}  // namespace

TEST_CASE("quadrature grids integrate exactly where expected") {
  const auto t = torus_grid(16);
  CHECK(t->size() == 256);
  CHECK(t->total_weight() == doctest::Approx(4 * pi * pi).epsilon(1e-14));

  const auto s = sphere_grid(16, 32);
  CHECK(s->total_weight() == doctest::Approx(4 * pi).epsilon(1e-14));
  double z2 = 0.0;
  for (std::size_t i = 0; i < s->size(); ++i) z2 += s->weight(i) * std::pow(s->point(i)[2], 2);
  CHECK(z2 == doctest::Approx(4 * pi / 3).epsilon(1e-13));

  const auto sm = ModelManifold::sphere2();
  const auto fib = QuadratureGrid::sphere_fibonacci(sm, 500);
  CHECK(fib.total_weight() == doctest::Approx(4 * pi).epsilon(1e-13));
  const auto prod = QuadratureGrid::product(ModelManifold::product({sm, sm}),
                                            {QuadratureGrid::sphere_gauss_legendre(sm, 4, 8), fib});
  CHECK(prod.size() == 32 * 500);
  CHECK(prod.total_weight() == doctest::Approx(16 * pi * pi).epsilon(1e-13));

  const auto nb = s->neighbors(0.5);
  for (std::size_t i = 0; i < nb.size(); ++i)
    for (int j : nb[i]) CHECK(std::find(nb[j].begin(), nb[j].end(), static_cast<int>(i)) != nb[j].end());
}

TEST_CASE("torus heat kernel oracles agree") {
  const auto m = ModelManifold::torus({2 * pi, 3.0});
  std::mt19937_64 rng(1);
  for (double t : {0.05, 0.5, 2.0})
    for (int trial = 0; trial < 10; ++trial) {
      const Point x = m.random_point(rng), y = m.random_point(rng);
      const double a = exact_torus_heat_kernel(m, x, y, t), b = torus_heat_kernel_fourier(m, x, y, t);
      CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, a));
    }
  const auto g = torus_grid(64);
  for (double t : {0.05, 0.3}) {
    double mass = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i)
      mass += g->weight(i) * exact_torus_heat_kernel(g->manifold(), g->point(5), g->point(i), t);
    CHECK(std::abs(mass - 1.0) < 1e-12);
  }
}

TEST_CASE("sphere scalar heat kernel conserves mass and composes") {
  const auto g = sphere_grid(32, 64);
  const Point x = g->point(7), y = g->point(900);
  const double t = 0.1;
  double mass = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    const Point& z = g->point(i);
    mass += g->weight(i) * sphere_scalar_heat_kernel(1.0, x.dot(z), t);
    comp += g->weight(i) * sphere_scalar_heat_kernel(1.0, x.dot(z), t / 2) *
            sphere_scalar_heat_kernel(1.0, z.dot(y), t / 2);
  }
  CHECK(std::abs(mass - 1.0) < 1e-10);
  CHECK(std::abs(comp - sphere_scalar_heat_kernel(1.0, x.dot(y), t)) < 1e-8);
  // Large t approaches the uniform density.
  CHECK(sphere_scalar_heat_kernel(1.0, -0.3, 20.0) == doctest::Approx(1.0 / (4 * pi)).epsilon(1e-8));
}

TEST_CASE("field assembly matches the pointwise kernel") {
  const auto g = sphere_grid(8, 16);
  const auto& m = g->manifold();
  for (auto [kind, ricci] : {std::pair{FieldKind::Approximate, true}, std::pair{FieldKind::ApproximateNoRicci, false}}) {
    const auto f = make_field(g, 0.2, kind);
    double err = 0.0;
    for (std::size_t x = 0; x < g->size(); x += 3)
      for (std::size_t y = 0; y < g->size(); y += 5) {
        const auto k = approximate_K(m, g->point(x), g->point(y), 0.2, {6.0, ricci});
        err = std::max(err, (f.at(x, y).matrix() - k.matrix().matrix()).cwiseAbs().maxCoeff());
      }
    CHECK(err < 1e-12);
  }
  const auto p = make_field(g, 0.0, FieldKind::Transport);
  CHECK((p.at(3, 3).matrix() - FormEndomorphism::identity(2).matrix()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS(make_field(g, 0.1, FieldKind::ExactTorus));
  CHECK_THROWS(make_field(g, 0.0, FieldKind::Approximate));
}

TEST_CASE("exact torus field equals the approximate kernel at small t") {
  const auto g = torus_grid(32);
  const auto k = make_field(g, 0.1, FieldKind::Approximate);
  const auto e = make_field(g, 0.1, FieldKind::ExactTorus);
  CHECK(rel_diff(e, k) < 1e-12);
}

TEST_CASE("P * P on the torus is a multiple of the identity at every pair") {
  const auto g = torus_grid(16);
  const auto p = make_field(g, 0.0, FieldKind::Transport);
  const auto pp = star_product(p, p);
  for (std::size_t x = 0; x < g->size(); x += 7)
    for (std::size_t y = 0; y < g->size(); y += 11) {
      const Eigen::MatrixXd e = pp.at(x, y).matrix();
      CHECK((e - e(0, 0) * Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("HP * HP on the torus reproduces H(t1 + t2) P") {
  const auto g = torus_grid(32);
  const auto a = make_field(g, 0.1, FieldKind::GaussianTransport);
  const auto b = make_field(g, 0.15, FieldKind::GaussianTransport);
  const auto c = make_field(g, 0.25, FieldKind::GaussianTransport);
  CHECK(rel_diff(c, star_product(a, b)) < 1e-8);
}

TEST_CASE("star product is associative and fold order does not matter") {
  // Slices small enough that truncation at the cutoff radius only drops Gaussian tails.
  const auto g = sphere_grid(8, 16);
  const auto a = make_field(g, 0.02, FieldKind::Approximate);
  const auto b = make_field(g, 0.03, FieldKind::Approximate);
  const auto c = make_field(g, 0.025, FieldKind::Approximate);
  CHECK(rel_diff(star_product(star_product(a, b), c), star_product(a, star_product(b, c))) < 1e-10);

  const Partition p({0.02, 0.03, 0.025, 0.015});
  CHECK(rel_diff(k_star_partition(g, p), k_star_balanced(g, p)) < 1e-10);
  CHECK(rel_diff(k_star_partition(g, Partition::dyadic(0.08, 2)), k_star_dyadic(g, 0.08, 2)) < 1e-10);
  const auto ext = extend_by_semigroup({a, b, c});
  CHECK(rel_diff(ext, star_product(star_product(a, b), c)) < 1e-12);
  CHECK(ext.t() == doctest::Approx(0.075));
}

TEST_CASE("applying fields to forms") {
  const auto g = sphere_grid(8, 16);
  const auto a = make_field(g, 0.02, FieldKind::Approximate);
  const auto b = make_field(g, 0.03, FieldKind::Approximate);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  FormSamples f(g->size(), 4);
  for (int i = 0; i < f.rows(); ++i)
    for (int j = 0; j < 4; ++j) f(i, j) = nd(rng);
  const FormSamples lhs = apply_to_form(star_product(a, b), f), rhs = apply_to_form(a, apply_to_form(b, f));
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10 * lhs.cwiseAbs().maxCoeff());
  CHECK_THROWS(apply_to_form(a, FormSamples::Zero(3, 4)));
}

TEST_CASE("the kernel tends to the identity on smooth functions as t shrinks") {
  const auto g = sphere_grid(16, 32);
  FormSamples f = FormSamples::Zero(g->size(), 4);
  for (std::size_t i = 0; i < g->size(); ++i) f(i, 0) = g->point(i)[2];
  std::vector<double> ts{0.04, 0.08, 0.16}, dev;
  for (double t : ts) {
    const FormSamples kf = apply_to_form(make_field(g, t, FieldKind::Approximate), f);
    dev.push_back((kf - f).cwiseAbs().maxCoeff());
  }
  CHECK(dev[0] < 0.1);
  CHECK(loglog_slope(ts, dev) >= 0.5);
}

TEST_CASE("truncation zeroes pairs beyond the radius") {
  const auto g = sphere_grid(8, 16);
  auto f = make_field(g, 0.2, FieldKind::Approximate);
  f.truncate(0.5);
  const auto& m = g->manifold();
  for (std::size_t x = 0; x < g->size(); ++x)
    for (std::size_t y = 0; y < g->size(); ++y)
      if (m.distance(g->point(x), g->point(y)) >= 0.5) CHECK(f.at(x, y).matrix().cwiseAbs().maxCoeff() == 0.0);
  CHECK(f.radius() == 0.5);
}

TEST_CASE("partitions") {
  const auto u = Partition::uniform(0.3, 3);
  CHECK(u.slices().size() == 3);
  CHECK(u.total() == doctest::Approx(0.3));
  CHECK(u.mesh() == doctest::Approx(0.1));
  const Partition p({0.1, 0.7, 0.3});
  const auto r = p.refine(7);
  CHECK(r.slices().size() == 21);
  CHECK(r.total() == p.total());
  CHECK(r.mesh() == doctest::Approx(0.1));
  CHECK(Partition::dyadic(1.0, 4).slices().size() == 16);
  CHECK_THROWS(Partition({0.1, -0.2}));
  CHECK_THROWS(Partition(std::vector<double>{}));
}

TEST_CASE("kernel norm of H P and homogeneity") {
  const auto g = torus_grid(16);
  const auto hp = make_field(g, 0.1, FieldKind::GaussianTransport);
  const KernelNormParams np(1.0, 0.25, 0.1);
  const double v = kernel_norm_t(hp, np);
  CHECK(v <= 1.0);
  CHECK(v > 0.9);
  CHECK(kernel_norm_t(hp.scaled(2.5), np) == doctest::Approx(2.5 * v).epsilon(1e-14));
  CHECK_THROWS(KernelNormParams(-1.0, 0.25, 0.1));
  CHECK_THROWS(KernelNormParams(1.0, 0.6, 0.1));
  CHECK_THROWS(KernelNormParams(1.0, 0.25, 0.0));
}

TEST_CASE("flat semigroup defect is at quadrature noise") {
  const auto g = torus_grid(32);
  const KernelNormParams np(1.0, 0.25, 0.2);
  CHECK(semigroup_defect(g, 0.1, 0.1, np) < 1e-8);
  CHECK(grid_floor(g, 0.1, 0.1, np) < 1e-8);
}

TEST_CASE("star products do not depend on the thread count") {
  const auto g = sphere_grid(8, 16);
  const auto a = make_field(g, 0.2, FieldKind::Approximate);
  set_num_threads(1);
  const auto one = star_product(a, a);
  set_num_threads(4);
  const auto four = star_product(a, a);
  set_num_threads(1);
  CHECK(max_entry(one - four) == 0.0);
}
