#include "pathslice/gbc.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pathslice/fit.hpp"
#include "pathslice/parallel.hpp"

namespace pathslice {

namespace {

using Block = TripleGrassmann::Block;

Multivector pfaffian_rec(const std::vector<std::vector<Multivector>>& a, std::vector<int> idx, int n) {
  if (idx.empty()) return Multivector::scalar(n, 1.0);
  const int first = idx[0];
  Multivector acc(n);
  for (std::size_t j = 1; j < idx.size(); ++j) {
    std::vector<int> rest;
    for (std::size_t k = 1; k < idx.size(); ++k)
      if (k != j) rest.push_back(idx[k]);
    const Multivector term = wedge(a[first][idx[j]], pfaffian_rec(a, rest, n));
    acc = (j % 2 == 1) ? acc + term : acc - term;
  }
  return acc;
}

}  // namespace

double pfaffian_berezin(const CurvatureTensor& r) {
  const int n = r.n;
  TripleGrassmann q(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double c = r(i, j, k, l);
          if (c == 0.0 || i == j || k == l) continue;
          q += TripleGrassmann::generator(n, Block::PsiX, i + 1, 0.25 * c) *
               TripleGrassmann::generator(n, Block::PsiX, j + 1) * TripleGrassmann::generator(n, Block::Rho, l + 1) *
               TripleGrassmann::generator(n, Block::Rho, k + 1);
        }
  const TripleGrassmann b = berezin(exp_nilpotent(q), Block::Rho);
  const Mask top = (Mask{1} << n) - 1;
  return b.coeff(top, 0, 0).real();
}

double pfaffian_combinatorial(const CurvatureTensor& r) {
  const int n = r.n;
  if (n % 2 != 0) throw std::invalid_argument("Pfaffian needs even dimension");
  std::vector<std::vector<Multivector>> omega(n, std::vector<Multivector>(n, Multivector(n)));
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          const Mask m = (Mask{1} << i) | (Mask{1} << j);
          omega[k][l][m] += 0.5 * r(i, j, l, k) * reorder_sign(Mask{1} << i, Mask{1} << j);
        }
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  return berezin(pfaffian_rec(omega, idx, n));
}

double pfaffian_curvature(const ModelManifold& m, const Point& x) { return pfaffian_berezin(m.curvature(x)); }

double SupertraceField::integral() const {
  CompensatedSum s;
  for (std::size_t i = 0; i < values.size(); ++i) s.add(grid->weight(i) * values[i]);
  return s.value();
}

SupertraceField supertrace_diagonal(const KernelField& l) {
  if (!(l.radius() > 0.0)) throw std::invalid_argument("field stores no diagonal pairs");
  SupertraceField f;
  f.grid = l.grid();
  f.t = l.t();
  f.values.resize(l.size());
  parallel_for(l.size(), [&](std::size_t x) { f.values[x] = supertrace(l.at(x, x)); });
  return f;
}

GbcScan gbc_limit_scan(const ModelManifold& m, const Point& x, const std::vector<double>& ts,
                       const KernelOptions& opt) {
  if (ts.size() < 2) throw std::invalid_argument("limit scan needs at least two times");
  GbcScan s;
  s.t = ts;
  for (double t : ts) s.closed.push_back(supertrace(approximate_K(m, x, x, t, opt).matrix()));
  s.limit = richardson_limit(s.t, s.closed);
  s.target = std::pow(2.0 * std::numbers::pi, -0.5 * m.dim()) * pfaffian_curvature(m, x);
  s.deviation = std::abs(s.limit - s.target);
  return s;
}

double euler_characteristic_estimate(const GridPtr& grid, double t, int depth, FieldKind kind,
                                     const KernelOptions& opt) {
  return supertrace_diagonal(k_star_dyadic(grid, t, depth, kind, opt)).integral();
}

double euler_characteristic_factorized(const std::vector<GridPtr>& factor_grids, double t, int depth,
                                       FieldKind kind, const KernelOptions& opt) {
  double chi = 1.0;
  for (const auto& g : factor_grids) chi *= euler_characteristic_estimate(g, t, depth, kind, opt);
  return chi;
}

int euler_characteristic_exact(const ModelManifold& m) {
  int chi = 1;
  for (const auto& f : m.factors()) chi *= std::holds_alternative<SphereFactor>(f) ? 2 : 0;
  return chi;
}

double product_kernel_defect(const ModelManifold& m, const std::vector<std::pair<Point, Point>>& pairs, double t,
                             const KernelOptions& opt) {
  const int n = m.dim();
  double worst = 0.0;
  for (const auto& [x, y] : pairs) {
    const Eigen::MatrixXd full = approximate_K(m, x, y, t, opt).matrix().matrix();
    Eigen::MatrixXd kron = Eigen::MatrixXd::Ones(1, 1);
    int done = 0;
    for (std::size_t f = 0; f < m.factors().size(); ++f) {
      const ModelManifold part = m.factor_manifold(f);
      const int a = m.factor_ambient_offset(f), na = part.ambient_dim(), nf = part.dim();
      const Eigen::MatrixXd k =
          approximate_K(part, x.segment(a, na), y.segment(a, na), t, opt).matrix().matrix();
      Eigen::MatrixXd next = Eigen::MatrixXd::Zero(1 << (done + nf), 1 << (done + nf));
      for (Mask i1 = 0; i1 < (Mask{1} << done); ++i1)
        for (Mask j1 = 0; j1 < (Mask{1} << done); ++j1)
          for (Mask i2 = 0; i2 < (Mask{1} << nf); ++i2)
            for (Mask j2 = 0; j2 < (Mask{1} << nf); ++j2)
              next(i1 | (i2 << done), j1 | (j2 << done)) = kron(i1, j1) * k(i2, j2);
      kron = next;
      done += nf;
    }
    if (done != n) throw std::logic_error("factor dimensions do not add up");
    const double scale = std::max(1.0, full.cwiseAbs().maxCoeff());
    worst = std::max(worst, (full - kron).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

ErrorSupertraceReport error_supertrace_decay(const GridPtr& grid, const std::vector<double>& ts, int depth,
                                             FieldKind kind, const KernelOptions& opt) {
  ErrorSupertraceReport r;
  r.t = ts;
  for (double t : ts) {
    const SupertraceField s = supertrace_diagonal(k_star_dyadic(grid, t, depth, kind, opt) -
                                                  make_field(grid, t, kind, opt));
    double worst = 0.0;
    for (double v : s.values) worst = std::max(worst, std::abs(v));
    r.max_abs_str.push_back(worst);
    r.integral.push_back(s.integral());
  }
  r.exponent = loglog_slope(r.t, r.max_abs_str);
  return r;
}

}  // namespace pathslice
