#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "pathslice/exterior.hpp"
#include "test_util.hpp"

using namespace pathslice;
using pathslice::testing::random_endomorphism;
using Block = TripleGrassmann::Block;

namespace {

// Sign of concatenating the letters of a and b and sorting them by adjacent swaps.
int letter_sign(Mask a, Mask b, int bits) {
  if (a & b) return 0;
  std::vector<int> word;
  for (int i = 0; i < bits; ++i)
    if (a >> i & 1) word.push_back(i);
  for (int i = 0; i < bits; ++i)
    if (b >> i & 1) word.push_back(i);
  int swaps = 0;
  for (std::size_t i = 0; i < word.size(); ++i)
    for (std::size_t j = 0; j + 1 < word.size() - i; ++j)
      if (word[j] > word[j + 1]) {
        std::swap(word[j], word[j + 1]);
        ++swaps;
      }
  return swaps % 2 ? -1 : 1;
}

TripleGrassmann random_poly(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  TripleGrassmann p(n);
  for (Mask m = 0; m < p.size(); ++m) p[m] = cplx(g(rng), g(rng));
  return p;
}

double max_diff(const TripleGrassmann& a, const TripleGrassmann& b) { return (a - b).max_abs(); }

}  // namespace

TEST_CASE("reorder_sign matches adjacent-swap counting") {
  for (Mask a = 0; a < 64; ++a)
    for (Mask b = 0; b < 64; ++b) CHECK(reorder_sign(a, b) == letter_sign(a, b, 6));
}

TEST_CASE("wedge signs") {
  const int n = 2;
  const auto p1 = Multivector::generator(n, 1), p2 = Multivector::generator(n, 2);
  CHECK(wedge(p1, p2)[3] == 1.0);
  CHECK(wedge(p2, p1)[3] == -1.0);
  CHECK(wedge(p1, p1)[1] == 0.0);
  CHECK(berezin(wedge(p1, p2)) == 1.0);
  CHECK(berezin(Multivector::scalar(n, 5.0)) == 0.0);
}

TEST_CASE("triple Grassmann product equals the letter-by-letter oracle on all monomial pairs") {
  std::mt19937_64 rng(7);
  for (int n : {2, 4}) {
    const int bits = 3 * n;
    const TripleGrassmann a = random_poly(n, rng), b = random_poly(n, rng);
    const TripleGrassmann c = a * b;
    const Mask size = Mask{1} << bits;
    std::vector<cplx> ref(size, cplx(0.0));
    std::vector<std::vector<int>> letters(size);
    for (Mask m = 0; m < size; ++m)
      for (int i = 0; i < bits; ++i)
        if (m >> i & 1) letters[m].push_back(i);
    for (Mask x = 0; x < size; ++x)
      for (Mask y = 0; y < size; ++y) {
        if (x & y) continue;
        int inv = 0;
        for (int ly : letters[y])
          for (int lx : letters[x]) inv += lx > ly;
        ref[x | y] += (inv % 2 ? -1.0 : 1.0) * a[x] * b[y];
      }
    double err = 0.0;
    for (Mask m = 0; m < size; ++m) err = std::max(err, std::abs(ref[m] - c[m]));
    CHECK(err < 1e-10);
  }
  // Spot check the oracle itself on single monomials.
  const int n = 2;
  const auto m1 = TripleGrassmann::monomial(n, 2, 0, 0), m2 = TripleGrassmann::monomial(n, 1, 0, 1);
  CHECK((m1 * m2).coeff(3, 0, 1) == cplx(double(letter_sign(2, 1 | (1 << 4), 6))));
}

TEST_CASE("triple Grassmann product is associative") {
  std::mt19937_64 rng(11);
  for (int n : {2, 4}) {
    const auto a = random_poly(n, rng), b = random_poly(n, rng), c = random_poly(n, rng);
    const auto l = (a * b) * c, r = a * (b * c);
    CHECK(max_diff(l, r) <= 1e-10 * std::max(1.0, l.max_abs()));
  }
}

TEST_CASE("exp of a nilpotent element truncates exactly") {
  const int n = 2;
  const auto p = TripleGrassmann::generator(n, Block::PsiX, 1) * TripleGrassmann::generator(n, Block::Rho, 2);
  const auto e = exp_nilpotent(p);
  CHECK(max_diff(e, TripleGrassmann::scalar(n, 1.0) + p) == 0.0);
  const auto s = exp_nilpotent(TripleGrassmann::scalar(n, 0.5));
  CHECK(std::abs(s[0] - std::exp(0.5)) < 1e-15);
}

TEST_CASE("rho integral of the plane-wave exponent is the identity kernel") {
  for (int n : {2, 4}) {
    TripleGrassmann e(n);
    for (int l = 1; l <= n; ++l)
      e += TripleGrassmann::generator(n, Block::Rho, l, cplx(0.0, 1.0)) *
           (TripleGrassmann::generator(n, Block::PsiX, l) - TripleGrassmann::generator(n, Block::PsiY, l));
    const auto k = kernel_to_endomorphism(berezin(exp_nilpotent(e), Block::Rho));
    CHECK((k.matrix() - FormEndomorphism::identity(n).matrix()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("kernel_to_endomorphism agrees with direct Berezin application") {
  std::mt19937_64 rng(3);
  const int n = 2;
  const Mask full = 3;
  for (int trial = 0; trial < 20; ++trial) {
    const auto e = random_endomorphism(n, rng);
    const auto l = endomorphism_to_kernel(e);
    CHECK((kernel_to_endomorphism(l).matrix() - e.matrix()).cwiseAbs().maxCoeff() < 1e-14);
    for (Mask j = 0; j <= full; ++j) {
      // ∫ L(ψ_x, ψ_y) ψ_y^J dψ_y by multiplication then Berezin over ψ_y.
      const auto image = berezin(l * TripleGrassmann::monomial(n, 0, 0, j), Block::PsiY);
      for (Mask i = 0; i <= full; ++i) CHECK(std::abs(image.coeff(i, 0, 0).real() - e(i, j)) < 1e-14);
    }
  }
  // The top ψ_y monomial keeps only the constant part of a form.
  const auto top = kernel_to_endomorphism(TripleGrassmann::monomial(n, 0, 0, full));
  CHECK(top(0, 0) == 1.0);
  CHECK(top.matrix().cwiseAbs().sum() == 1.0);
  CHECK_THROWS(kernel_to_endomorphism(TripleGrassmann::monomial(n, 1, 0, 0)));
  CHECK_THROWS(kernel_to_endomorphism(TripleGrassmann::monomial(n, 0, 1, full)));
}

TEST_CASE("degree-preserving construction is validated") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(FormEndomorphism(2, m), std::invalid_argument);
}

TEST_CASE("exterior_power is multiplicative and gives determinants") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(4, 4), b = Eigen::MatrixXd::Random(4, 4);
  const auto lhs = exterior_power(a * b), rhs = exterior_power(a) * exterior_power(b);
  CHECK((lhs.matrix() - rhs.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(exterior_power(a)(15, 15) - a.determinant()) < 1e-12);
}

TEST_CASE("supertrace examples") {
  for (int n : {2, 4, 6}) CHECK(supertrace(FormEndomorphism::identity(n)) == 0.0);
  FormEndomorphism p(4);
  p.set(0, 0, 1.0);
  CHECK(supertrace(p) == 1.0);
  CHECK(supertrace_berezin(p) == doctest::Approx(1.0));
}

TEST_CASE("matrix and Berezin supertraces agree on random endomorphisms") {
  std::mt19937_64 rng(42);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = trial % 2 ? 4 : 2;
    const auto e = random_endomorphism(n, rng);
    const double a = supertrace(e), b = supertrace_berezin(e);
    worst = std::max(worst, std::abs(a - b) / std::max(1.0, e.matrix().cwiseAbs().maxCoeff()));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("degree blocks below the top carry no supertrace") {
  std::mt19937_64 rng(9);
  for (int n : {2, 4}) {
    const auto e = random_endomorphism(n, rng);
    const auto blocks = degree_decompose(e);
    for (const auto& b : blocks) {
      if (b.degree < n) CHECK(std::abs(supertrace(b.block)) < 1e-12);
      else CHECK(std::abs(supertrace(b.block) - supertrace(e)) < 1e-12);
    }
  }
}

TEST_CASE("degree_decompose examples and round trip") {
  const auto id = degree_decompose(FormEndomorphism::identity(4));
  REQUIRE(id.size() == 1);
  CHECK(id[0].degree == 0);
  const auto m = degree_decompose(normal_monomial(2, 1, 2));
  REQUIRE(m.size() == 1);
  CHECK(m[0].degree == 1);

  std::mt19937_64 rng(1);
  for (int n : {2, 4}) {
    const auto e = random_endomorphism(n, rng);
    FormEndomorphism sum(n);
    for (const auto& b : degree_decompose(e)) {
      sum = sum + b.block;
      // Block k annihilates forms of degree < k.
      for (Mask c = 0; c < (Mask{1} << n); ++c)
        if (popcount(c) < b.degree) CHECK(b.block.matrix().col(c).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK((sum.matrix() - e.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("t-norm examples") {
  const TNormParams p(0.25, 0.01);
  CHECK(t_norm(normal_monomial(2, 1, 1), p) == doctest::Approx(1.0));
  CHECK(t_norm(normal_monomial(4, 15, 15), p) == doctest::Approx(std::pow(0.01, 2 * (-0.5 + 0.25 / 4))));
  CHECK_THROWS_AS(TNormParams(0.7, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(TNormParams(0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(TNormParams(0.25, 0.0), std::invalid_argument);
}

TEST_CASE("t-norm is nonincreasing in t and matches the evaluator") {
  std::mt19937_64 rng(13);
  const TNormEvaluator ev(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto e = random_endomorphism(4, rng);
    double prev = INFINITY;
    for (double t : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
      const TNormParams p(0.25, t);
      const double v = t_norm(e, p);
      CHECK(v <= prev * (1 + 1e-14));
      CHECK(std::abs(ev(e.matrix().data(), p) - v) <= 1e-12 * v);
      prev = v;
    }
  }
}

TEST_CASE("t-norm submultiplicative constant does not grow as t shrinks") {
  std::mt19937_64 rng(17);
  std::vector<FormEndomorphism> es;
  for (int i = 0; i < 1000; ++i) es.push_back(random_endomorphism(4, rng));
  auto constant = [&](double t) {
    const TNormParams p(0.25, t);
    double c = 0.0;
    for (std::size_t i = 0; i + 1 < es.size(); i += 2)
      c = std::max(c, t * t_norm(es[i] * es[i + 1], p) / (t_norm(es[i], p) * t_norm(es[i + 1], p)));
    return c;
  };
  const double small = constant(1e-3), large = constant(1e-1);
  CHECK(std::isfinite(small));
  CHECK(small <= 1.1 * large);
}
