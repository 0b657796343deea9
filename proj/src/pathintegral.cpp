#include "pathslice/pathintegral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "pathslice/fit.hpp"
#include "pathslice/parallel.hpp"

namespace pathslice {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kRowBlock = 256;

double gaussian(int n, double d2, double t) { return std::pow(2.0 * kPi * t, -0.5 * n) * std::exp(-d2 / (2.0 * t)); }

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

// Minors of a for one degree sector, in subsets_of_degree order.
void sector_minors(const Eigen::MatrixXd& a, int d, Eigen::MatrixXd& out) {
  const int n = static_cast<int>(a.rows());
  if (d == 0) {
    out.setOnes(1, 1);
    return;
  }
  if (d == 1) {
    out = a;
    return;
  }
  if (d == n) {
    out.setConstant(1, 1, a.determinant());
    return;
  }
  const auto& s = subsets_of_degree(n, d);
  out.resize(s.size(), s.size());
  int ri[8], ci[8];
  Eigen::MatrixXd sub(d, d);
  for (std::size_t p = 0; p < s.size(); ++p) {
    for (int b = 0, q = 0; b < n; ++b)
      if (s[p] >> b & 1) ri[q++] = b;
    for (std::size_t c = 0; c < s.size(); ++c) {
      for (int b = 0, q = 0; b < n; ++b)
        if (s[c] >> b & 1) ci[q++] = b;
      for (int u = 0; u < d; ++u)
        for (int v = 0; v < d; ++v) sub(u, v) = a(ri[u], ci[v]);
      out(p, c) = d == 2 ? sub(0, 0) * sub(1, 1) - sub(0, 1) * sub(1, 0) : sub.determinant();
    }
  }
}

// Column runs of a row block that hold a nonzero entry, in units of kColTile.
constexpr std::size_t kColTile = 64;

std::vector<std::pair<std::size_t, std::size_t>> nonzero_runs(const KernelField::Plane& a, std::size_t r0,
                                                              std::size_t nr) {
  const std::size_t g = a.cols();
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t c0 = 0; c0 < g; c0 += kColTile) {
    const std::size_t nc = std::min(kColTile, g - c0);
    if (a.block(r0, c0, nr, nc).isZero(0.0)) continue;
    if (!runs.empty() && runs.back().second == c0)
      runs.back().second = c0 + nc;
    else
      runs.emplace_back(c0, c0 + nc);
  }
  return runs;
}

}  // namespace

// ------------------------------------------------------------ QuadratureGrid

QuadratureGrid QuadratureGrid::torus_uniform(const ModelManifold& m, int per_side) {
  if (!m.is_flat()) throw std::invalid_argument("uniform grid needs a torus");
  if (per_side < 1) throw std::invalid_argument("grid size must be positive");
  QuadratureGrid g(m);
  const int n = m.dim();
  std::vector<double> len;
  for (const auto& f : m.factors())
    for (double l : std::get<TorusFactor>(f).lengths) len.push_back(l);
  double cell = 1.0;
  for (double l : len) cell *= l / per_side;
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) total *= per_side;
  for (std::size_t idx = 0; idx < total; ++idx) {
    Point p(n);
    std::size_t r = idx;
    for (int i = n - 1; i >= 0; --i) {
      p[i] = static_cast<double>(r % per_side) * len[i] / per_side;
      r /= per_side;
    }
    g.points_.push_back(p);
    g.weights_.push_back(cell);
  }
  std::ostringstream s;
  s << "uniform " << per_side << "^" << n;
  g.description_ = s.str();
  return g;
}

QuadratureGrid QuadratureGrid::sphere_gauss_legendre(const ModelManifold& m, int nlat, int nlon) {
  if (m.factors().size() != 1 || !std::holds_alternative<SphereFactor>(m.factors()[0]))
    throw std::invalid_argument("Gauss-Legendre grid needs a sphere");
  if (nlat < 1 || nlon < 1) throw std::invalid_argument("grid size must be positive");
  const double r = std::get<SphereFactor>(m.factors()[0]).radius;
  QuadratureGrid g(m);
  std::vector<double> z, w;
  gauss_legendre(nlat, z, w);
  for (int i = 0; i < nlat; ++i)
    for (int j = 0; j < nlon; ++j) {
      const double phi = (j + 0.5) * 2.0 * kPi / nlon;
      const double s = std::sqrt(1.0 - z[i] * z[i]);
      Point p(3);
      p << s * std::cos(phi), s * std::sin(phi), z[i];
      g.points_.push_back(p);
      g.weights_.push_back(w[i] * 2.0 * kPi / nlon * r * r);
    }
  std::ostringstream s;
  s << "gauss_legendre " << nlat << "x" << nlon;
  g.description_ = s.str();
  return g;
}

QuadratureGrid QuadratureGrid::sphere_fibonacci(const ModelManifold& m, int count) {
  if (m.factors().size() != 1 || !std::holds_alternative<SphereFactor>(m.factors()[0]))
    throw std::invalid_argument("Fibonacci grid needs a sphere");
  if (count < 1) throw std::invalid_argument("grid size must be positive");
  const double r = std::get<SphereFactor>(m.factors()[0]).radius;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  QuadratureGrid g(m);
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double s = std::sqrt(1.0 - z * z);
    const double phi = golden * i;
    Point p(3);
    p << s * std::cos(phi), s * std::sin(phi), z;
    g.points_.push_back(p);
    g.weights_.push_back(4.0 * kPi * r * r / count);
  }
  g.description_ = "fibonacci " + std::to_string(count);
  return g;
}

QuadratureGrid QuadratureGrid::product(const ModelManifold& m, const std::vector<QuadratureGrid>& parts) {
  QuadratureGrid g(m);
  std::vector<Point> pts(1, Point(0));
  std::vector<double> wts(1, 1.0);
  std::string desc;
  for (const auto& part : parts) {
    std::vector<Point> np;
    std::vector<double> nw;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = 0; j < part.size(); ++j) {
        Point p(pts[i].size() + part.point(j).size());
        p << pts[i], part.point(j);
        np.push_back(p);
        nw.push_back(wts[i] * part.weight(j));
      }
    pts.swap(np);
    wts.swap(nw);
    desc += (desc.empty() ? "" : " x ") + part.description();
  }
  if (!pts.empty() && pts[0].size() != m.ambient_dim()) throw std::invalid_argument("factor grids do not match manifold");
  g.points_ = std::move(pts);
  g.weights_ = std::move(wts);
  g.description_ = desc;
  return g;
}

double QuadratureGrid::total_weight() const {
  CompensatedSum s;
  for (double w : weights_) s.add(w);
  return s.value();
}

std::vector<std::vector<int>> QuadratureGrid::neighbors(double radius) const {
  std::vector<std::vector<int>> out(size());
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = 0; j < size(); ++j)
      if (manifold_.distance(points_[i], points_[j]) < radius) out[i].push_back(static_cast<int>(j));
  return out;
}

// --------------------------------------------------------------- KernelField

KernelField::KernelField(GridPtr grid, double t, double radius)
    : grid_(std::move(grid)), n_(grid_->manifold().dim()), t_(t), radius_(radius) {
  int off = 0;
  for (int d = 0; d <= n_; ++d) {
    offsets_.push_back(off);
    off += binomial(n_, d) * binomial(n_, d);
  }
  planes_.resize(off);
}

int KernelField::index(int d, int a, int b) const { return offsets_[d] + a * binomial(n_, d) + b; }

bool KernelField::has_plane(int d, int a, int b) const { return planes_[index(d, a, b)].has_value(); }

const KernelField::Plane& KernelField::plane(int d, int a, int b) const {
  const auto& p = planes_[index(d, a, b)];
  if (!p) throw std::logic_error("plane is not stored");
  return *p;
}

KernelField::Plane& KernelField::mutable_plane(int d, int a, int b) {
  auto& p = planes_[index(d, a, b)];
  if (!p) p = Plane::Zero(size(), size());
  return *p;
}

void KernelField::drop_zero_planes() {
  for (auto& p : planes_)
    if (p && (p->array() == 0.0).all()) p.reset();
}

std::size_t KernelField::stored_planes() const {
  std::size_t c = 0;
  for (const auto& p : planes_) c += p.has_value();
  return c;
}

FormEndomorphism KernelField::at(std::size_t x, std::size_t y) const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(1 << n_, 1 << n_);
  for (int d = 0; d <= n_; ++d) {
    const auto& s = subsets_of_degree(n_, d);
    for (std::size_t a = 0; a < s.size(); ++a)
      for (std::size_t b = 0; b < s.size(); ++b) {
        const auto& p = planes_[index(d, a, b)];
        if (p) m(s[a], s[b]) = (*p)(x, y);
      }
  }
  return FormEndomorphism(n_, m);
}

void KernelField::set(std::size_t x, std::size_t y, const FormEndomorphism& e) {
  for (int d = 0; d <= n_; ++d) {
    const auto& s = subsets_of_degree(n_, d);
    for (std::size_t a = 0; a < s.size(); ++a)
      for (std::size_t b = 0; b < s.size(); ++b) {
        const double v = e(s[a], s[b]);
        if (v != 0.0 || has_plane(d, a, b)) mutable_plane(d, a, b)(x, y) = v;
      }
  }
}

KernelField KernelField::operator-(const KernelField& o) const {
  if (o.grid_ != grid_) throw std::invalid_argument("fields live on different grids");
  KernelField r(grid_, t_, std::max(radius_, o.radius_));
  for (std::size_t i = 0; i < planes_.size(); ++i) {
    if (planes_[i] && o.planes_[i])
      r.planes_[i] = *planes_[i] - *o.planes_[i];
    else if (planes_[i])
      r.planes_[i] = *planes_[i];
    else if (o.planes_[i])
      r.planes_[i] = -*o.planes_[i];
  }
  return r;
}

KernelField KernelField::scaled(double s) const {
  KernelField r(*this);
  for (auto& p : r.planes_)
    if (p) *p *= s;
  return r;
}

void KernelField::truncate(double r) {
  radius_ = std::min(radius_, r);
  const auto& m = grid_->manifold();
  const std::size_t g = size();
  parallel_for(g, [&](std::size_t x) {
    for (std::size_t y = 0; y < g; ++y) {
      if (m.distance(grid_->point(x), grid_->point(y)) < radius_) continue;
      for (auto& p : planes_)
        if (p) (*p)(x, y) = 0.0;
    }
  });
}

// ------------------------------------------------------------------- fields

KernelField make_field(const GridPtr& grid, double t, FieldKind kind, const KernelOptions& opt) {
  const ModelManifold& m = grid->manifold();
  const int n = m.dim();
  if (kind != FieldKind::Transport && !(t > 0.0)) throw std::invalid_argument("field time must be positive");
  if (kind == FieldKind::ExactTorus && !m.is_flat()) throw std::invalid_argument("exact heat kernel needs a torus");
  const double radius = kind == FieldKind::Transport ? support_radius(m) : cutoff_radius(m, t, opt.cutoff_c);
  KernelField f(grid, kind == FieldKind::Transport ? 0.0 : t, radius);
  const std::size_t g = grid->size();

  // Fermionic part at identity transport, keyed by the curvature components at y. With parallel
  // curvature the transported R_x equals R_y, so M = prefactor * Λ(Tᵀ) * E(R_y).
  std::map<std::vector<double>, std::vector<Eigen::MatrixXd>> cache;
  std::vector<const std::vector<Eigen::MatrixXd>*> fermionic(g, nullptr);
  std::vector<CurvatureTensor> curv;
  const bool curved = kind == FieldKind::Approximate || kind == FieldKind::ApproximateNoRicci;
  if (curved && !m.parallel_curvature()) throw std::logic_error("field builder assumes parallel curvature");
  for (std::size_t y = 0; y < g; ++y) {
    curv.push_back(m.curvature(grid->point(y)));
    if (!curved) continue;
    auto it = cache.find(curv.back().r);
    if (it == cache.end()) {
      const FormEndomorphism e =
          fermionic_kernel(t, curv.back(), curv.back(), Eigen::MatrixXd::Identity(n, n));
      std::vector<Eigen::MatrixXd> sectors;
      for (int d = 0; d <= n; ++d) sectors.push_back(e.sector(d));
      it = cache.emplace(curv.back().r, std::move(sectors)).first;
    }
    fermionic[y] = &it->second;
  }

  for (int d = 0; d <= n; ++d)
    for (int a = 0; a < binomial(n, d); ++a)
      for (int b = 0; b < binomial(n, d); ++b) f.mutable_plane(d, a, b);

  std::vector<std::vector<KernelField::Plane*>> planes(n + 1);
  for (int d = 0; d <= n; ++d)
    for (int a = 0; a < binomial(n, d); ++a)
      for (int b = 0; b < binomial(n, d); ++b) planes[d].push_back(&f.mutable_plane(d, a, b));

  // Fermionic sectors equal to the identity are skipped in the per-pair product.
  std::vector<bool> trivial(n + 1, true);
  if (curved)
    for (const auto& [key, sectors] : cache)
      for (int d = 0; d <= n; ++d)
        if (!sectors[d].isIdentity(0.0)) trivial[d] = false;

  parallel_for(g, [&](std::size_t x) {
    const Point& px = grid->point(x);
    Eigen::MatrixXd minors, blk;
    for (std::size_t y = 0; y < g; ++y) {
      const Point& py = grid->point(y);
      const double dist = m.distance(px, py);
      if (dist >= radius) continue;
      double pre = 1.0;
      switch (kind) {
        case FieldKind::Transport:
          break;
        case FieldKind::GaussianTransport:
          pre = gaussian(n, dist * dist, t);
          break;
        case FieldKind::ExactTorus:
          pre = exact_torus_heat_kernel(m, px, py, t);
          break;
        case FieldKind::Approximate:
        case FieldKind::ApproximateNoRicci: {
          double s = -t * curv[y].scalar / 6.0;
          if (kind == FieldKind::Approximate && !m.is_flat()) {
            const Tangent v = m.log_map(py, px);
            s += v.dot(curv[y].ricci * v) / 12.0;
          }
          pre = gaussian(n, dist * dist, t) * std::exp(s);
          break;
        }
      }
      const Eigen::MatrixXd tt = m.parallel_transport(px, py).transpose();
      for (int d = 0; d <= n; ++d) {
        sector_minors(tt, d, minors);
        const Eigen::MatrixXd* src = &minors;
        if (curved && !trivial[d]) {
          blk.noalias() = minors * (*fermionic[y])[d];
          src = &blk;
        }
        const int c = binomial(n, d);
        for (int a = 0; a < c; ++a)
          for (int b = 0; b < c; ++b) (*planes[d][a * c + b])(x, y) = pre * (*src)(a, b);
      }
    }
  });
  f.drop_zero_planes();
  return f;
}

KernelField star_product(const KernelField& a, const KernelField& b, const KernelOptions& opt) {
  if (a.grid() != b.grid()) throw std::invalid_argument("star product needs fields on the same grid");
  const GridPtr& grid = a.grid();
  const ModelManifold& m = grid->manifold();
  const int n = a.dim();
  const double t = a.t() + b.t();
  double radius = std::min(support_radius(m), a.radius() + b.radius());
  if (a.t() > 0.0 && b.t() > 0.0) radius = std::min(radius, cutoff_radius(m, t, opt.cutoff_c));
  KernelField out(grid, t, radius);
  const std::size_t g = grid->size();
  const Eigen::Map<const Eigen::VectorXd> w(grid->weights().data(), g);
  const std::size_t blocks = (g + kRowBlock - 1) / kRowBlock;
  for (int d = 0; d <= n; ++d) {
    const int c = binomial(n, d);
    for (int k = 0; k < c; ++k)
      for (int j = 0; j < c; ++j) {
        if (!b.has_plane(d, k, j)) continue;
        const KernelField::Plane bw = w.asDiagonal() * b.plane(d, k, j);
        for (int i = 0; i < c; ++i) {
          if (!a.has_plane(d, i, k)) continue;
          const KernelField::Plane& ap = a.plane(d, i, k);
          KernelField::Plane& op = out.mutable_plane(d, i, j);
          parallel_for(blocks, [&](std::size_t blk) {
            const std::size_t r0 = blk * kRowBlock;
            const std::size_t nr = std::min(kRowBlock, g - r0);
            for (const auto& [c0, c1] : nonzero_runs(ap, r0, nr))
              op.middleRows(r0, nr).noalias() += ap.block(r0, c0, nr, c1 - c0) * bw.middleRows(c0, c1 - c0);
          });
        }
      }
  }
  out.truncate(radius);
  out.drop_zero_planes();
  return out;
}

FormSamples apply_to_form(const KernelField& l, const FormSamples& f) {
  const std::size_t g = l.size();
  const int n = l.dim();
  if (static_cast<std::size_t>(f.rows()) != g || f.cols() != (1 << n))
    throw std::invalid_argument("form samples do not match the grid");
  const Eigen::Map<const Eigen::VectorXd> w(l.grid()->weights().data(), g);
  FormSamples out = FormSamples::Zero(g, 1 << n);
  for (int d = 0; d <= n; ++d) {
    const auto& s = subsets_of_degree(n, d);
    for (std::size_t a = 0; a < s.size(); ++a)
      for (std::size_t b = 0; b < s.size(); ++b) {
        if (!l.has_plane(d, a, b)) continue;
        const Eigen::VectorXd fw = w.cwiseProduct(f.col(s[b]));
        out.col(s[a]) += l.plane(d, a, b) * fw;
      }
  }
  return out;
}

// ---------------------------------------------------------------- partitions

Partition::Partition(std::vector<double> slices) : slices_(std::move(slices)) {
  if (slices_.empty()) throw std::invalid_argument("partition needs at least one slice");
  for (double s : slices_)
    if (!(s > 0.0)) throw std::invalid_argument("partition slices must be positive");
}

Partition Partition::uniform(double t, int pieces) { return Partition({t}).refine(pieces); }

double Partition::total() const {
  CompensatedSum s;
  for (double v : slices_) s.add(v);
  return s.value();
}

double Partition::mesh() const { return *std::max_element(slices_.begin(), slices_.end()); }

Partition Partition::refine(int pieces) const {
  if (pieces < 1) throw std::invalid_argument("refinement needs at least one piece");
  std::vector<double> out;
  for (double s : slices_) {
    const double q = s / pieces;
    CompensatedSum acc;
    for (int i = 0; i + 1 < pieces; ++i) {
      out.push_back(q);
      acc.add(q);
    }
    out.push_back(s - acc.value());
  }
  return Partition(std::move(out));
}

namespace {

struct FieldCache {
  const GridPtr& grid;
  FieldKind kind;
  const KernelOptions& opt;
  std::map<double, KernelField> fields;
  const KernelField& get(double t) {
    auto it = fields.find(t);
    if (it == fields.end()) it = fields.emplace(t, make_field(grid, t, kind, opt)).first;
    return it->second;
  }
};

KernelField balanced(FieldCache& c, const std::vector<double>& s, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return c.get(s[lo]);
  const std::size_t mid = lo + (hi - lo) / 2;
  return star_product(balanced(c, s, lo, mid), balanced(c, s, mid, hi), c.opt);
}

}  // namespace

KernelField k_star_partition(const GridPtr& grid, const Partition& p, FieldKind kind, const KernelOptions& opt) {
  FieldCache cache{grid, kind, opt, {}};
  const auto& s = p.slices();
  KernelField acc = cache.get(s[0]);
  for (std::size_t i = 1; i < s.size(); ++i) acc = star_product(acc, cache.get(s[i]), opt);
  return acc;
}

KernelField k_star_balanced(const GridPtr& grid, const Partition& p, FieldKind kind, const KernelOptions& opt) {
  FieldCache cache{grid, kind, opt, {}};
  return balanced(cache, p.slices(), 0, p.slices().size());
}

KernelField k_star_dyadic(const GridPtr& grid, double t, int depth, FieldKind kind, const KernelOptions& opt) {
  if (depth < 0) throw std::invalid_argument("depth must be nonnegative");
  KernelField acc = make_field(grid, std::ldexp(t, -depth), kind, opt);
  for (int i = 0; i < depth; ++i) acc = star_product(acc, acc, opt);
  return acc;
}

// --------------------------------------------------------------------- norms

KernelNormParams::KernelNormParams(double d, double eps, double time) : D(d), epsilon(eps), t(time) {
  if (!(d > 0.0)) throw std::invalid_argument("D must be positive");
  TNormParams check(eps, time);
}

double kernel_norm_t(const KernelField& l, const KernelNormParams& p, const KernelOptions&) {
  const GridPtr& grid = l.grid();
  const ModelManifold& m = grid->manifold();
  const int n = l.dim();
  const std::size_t g = l.size();
  const TNormEvaluator eval(n);
  const TNormParams tp(p.epsilon, p.t);
  std::vector<std::vector<const KernelField::Plane*>> planes(n + 1);
  for (int d = 0; d <= n; ++d)
    for (int a = 0; a < binomial(n, d); ++a)
      for (int b = 0; b < binomial(n, d); ++b)
        planes[d].push_back(l.has_plane(d, a, b) ? &l.plane(d, a, b) : nullptr);
  std::vector<double> row_max(g, 0.0);
  parallel_for(g, [&](std::size_t x) {
    double best = 0.0;
    Eigen::MatrixXd lbar = Eigen::MatrixXd::Zero(1 << n, 1 << n);
    Eigen::MatrixXd md, minors, prod;
    for (std::size_t y = 0; y < g; ++y) {
      const double dist = m.distance(grid->point(x), grid->point(y));
      if (dist >= l.radius()) continue;
      bool any = false;
      for (const auto& pd : planes)
        for (const auto* pl : pd)
          if (pl && (*pl)(x, y) != 0.0) any = true;
      if (!any) continue;
      // L̄ = M Λ(T_xy), sector by sector
      const Eigen::MatrixXd tr = m.parallel_transport(grid->point(x), grid->point(y));
      for (int d = 0; d <= n; ++d) {
        const auto& sub = subsets_of_degree(n, d);
        const int c = static_cast<int>(sub.size());
        md.resize(c, c);
        for (int a = 0; a < c; ++a)
          for (int b = 0; b < c; ++b) {
            const auto* pl = planes[d][a * c + b];
            md(a, b) = pl ? (*pl)(x, y) : 0.0;
          }
        sector_minors(tr, d, minors);
        prod.noalias() = md * minors;
        for (int a = 0; a < c; ++a)
          for (int b = 0; b < c; ++b) lbar(sub[a], sub[b]) = prod(a, b);
      }
      const double v = eval(lbar.data(), tp) / (gaussian(n, dist * dist, p.t) + p.D * p.t);
      best = std::max(best, v);
    }
    row_max[x] = best;
  });
  return *std::max_element(row_max.begin(), row_max.end());
}

double semigroup_defect(const GridPtr& grid, double t1, double t2, const KernelNormParams& p, FieldKind kind,
                        const KernelOptions& opt) {
  const KernelField k1 = make_field(grid, t1, kind, opt);
  const KernelField prod = t1 == t2 ? star_product(k1, k1, opt) : star_product(k1, make_field(grid, t2, kind, opt), opt);
  const KernelField k = make_field(grid, t1 + t2, kind, opt);
  return kernel_norm_t(prod - k, p, opt);
}

RefinementReport refinement_sweep(const GridPtr& grid, double t, const std::vector<int>& depths,
                                  const KernelNormParams& p, FieldKind kind, const KernelOptions& opt) {
  if (depths.empty()) throw std::invalid_argument("refinement sweep needs depths");
  RefinementReport r;
  r.t = t;
  r.depths = depths;
  std::optional<KernelField> prev;
  std::vector<double> mesh;
  for (int d : depths) {
    KernelField cur = k_star_dyadic(grid, t, d, kind, opt);
    if (prev) {
      r.successive.push_back(kernel_norm_t(cur - *prev, p, opt));
      mesh.push_back(std::ldexp(t, -d));
    }
    prev = std::move(cur);
  }
  r.deepest_vs_K = kernel_norm_t(*prev - make_field(grid, t, kind, opt), p, opt);
  r.log2_slope = loglog_slope(mesh, r.successive);
  return r;
}

// ------------------------------------------------------------------- oracles

double exact_torus_heat_kernel(const ModelManifold& m, const Point& x, const Point& y, double t) {
  if (!m.is_flat()) throw std::invalid_argument("exact heat kernel needs a torus");
  double value = 1.0;
  int axis = 0;
  for (const auto& f : m.factors())
    for (double len : std::get<TorusFactor>(f).lengths) {
      double d = std::fmod(x[axis] - y[axis], len);
      if (d > 0.5 * len) d -= len;
      if (d < -0.5 * len) d += len;
      const double norm = 1.0 / std::sqrt(2.0 * kPi * t);
      double s = norm * std::exp(-d * d / (2.0 * t));
      for (int k = 1;; ++k) {
        const double a = norm * std::exp(-(d + k * len) * (d + k * len) / (2.0 * t));
        const double b = norm * std::exp(-(d - k * len) * (d - k * len) / (2.0 * t));
        s += a + b;
        if (a + b < 1e-17 * s) break;
      }
      value *= s;
      ++axis;
    }
  return value;
}

double torus_heat_kernel_fourier(const ModelManifold& m, const Point& x, const Point& y, double t) {
  if (!m.is_flat()) throw std::invalid_argument("Fourier heat kernel needs a torus");
  double value = 1.0;
  int axis = 0;
  for (const auto& f : m.factors())
    for (double len : std::get<TorusFactor>(f).lengths) {
      const double d = x[axis] - y[axis];
      double s = 1.0;
      for (int k = 1;; ++k) {
        const double q = 2.0 * kPi * k / len;
        const double e = std::exp(-q * q * t / 2.0);
        s += 2.0 * e * std::cos(q * d);
        if (e < 1e-18) break;
      }
      value *= s / len;
      ++axis;
    }
  return value;
}

PointPairKernel exact_torus_kernel(const ModelManifold& m, const Point& x, const Point& y, double t) {
  PointPairKernel k(m.dim());
  k.x = x;
  k.y = y;
  k.t = t;
  k.zero = false;
  k.prefactor = exact_torus_heat_kernel(m, x, y, t);
  k.transport = Eigen::MatrixXd::Identity(m.dim(), m.dim());
  k.lbar = FormEndomorphism::identity(m.dim());
  return k;
}

double sphere_scalar_heat_kernel(double radius, double c, double t) {
  const double tau = t / (radius * radius);
  double p0 = 1.0, p1 = c;
  double s = 1.0;
  for (int l = 1;; ++l) {
    const double e = std::exp(-0.5 * l * (l + 1) * tau);
    s += (2.0 * l + 1.0) * e * p1;
    if ((2.0 * l + 1.0) * e < 1e-17) break;
    const double p2 = ((2.0 * l + 1.0) * c * p1 - l * p0) / (l + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return s / (4.0 * kPi * radius * radius);
}

namespace {

// Exact scalar heat kernel of a model manifold, when it is available in closed form.
double exact_scalar_heat(const ModelManifold& m, const Point& x, const Point& y, double t) {
  double v = 1.0;
  for (std::size_t f = 0; f < m.factors().size(); ++f) {
    const ModelManifold part = m.factor_manifold(f);
    const int a = m.factor_ambient_offset(f);
    const int na = part.ambient_dim();
    const Point px = x.segment(a, na), py = y.segment(a, na);
    if (part.is_flat()) {
      v *= exact_torus_heat_kernel(part, px, py, t);
    } else {
      const double r = std::get<SphereFactor>(part.factors()[0]).radius;
      v *= sphere_scalar_heat_kernel(r, std::clamp(px.dot(py), -1.0, 1.0), t);
    }
  }
  return v;
}

}  // namespace

double grid_floor(const GridPtr& grid, double t1, double t2, const KernelNormParams& p, const KernelOptions& opt) {
  const ModelManifold& m = grid->manifold();
  const std::size_t g = grid->size();
  const int n = m.dim();
  auto build = [&](double t) {
    const double r = cutoff_radius(m, t, opt.cutoff_c);
    KernelField::Plane a = KernelField::Plane::Zero(g, g);
    parallel_for(g, [&](std::size_t x) {
      for (std::size_t y = 0; y < g; ++y)
        if (m.distance(grid->point(x), grid->point(y)) < r) a(x, y) = exact_scalar_heat(m, grid->point(x), grid->point(y), t);
    });
    return a;
  };
  const Eigen::Map<const Eigen::VectorXd> w(grid->weights().data(), g);
  const KernelField::Plane a = build(t1);
  const KernelField::Plane b = t1 == t2 ? a : build(t2);
  const KernelField::Plane bw = w.asDiagonal() * b;
  KernelField::Plane c = build(t1 + t2);
  const std::size_t blocks = (g + kRowBlock - 1) / kRowBlock;
  parallel_for(blocks, [&](std::size_t blk) {
    const std::size_t r0 = blk * kRowBlock;
    const std::size_t nr = std::min(kRowBlock, g - r0);
    c.middleRows(r0, nr).noalias() -= a.middleRows(r0, nr) * bw;
  });
  const double t = t1 + t2;
  const double r = cutoff_radius(m, t, opt.cutoff_c);
  std::vector<double> row(g, 0.0);
  parallel_for(g, [&](std::size_t x) {
    for (std::size_t y = 0; y < g; ++y) {
      const double d = m.distance(grid->point(x), grid->point(y));
      if (d >= r) continue;
      row[x] = std::max(row[x], std::abs(c(x, y)) / (gaussian(n, d * d, t) + p.D * t));
    }
  });
  return *std::max_element(row.begin(), row.end());
}

KernelField extend_by_semigroup(const std::vector<KernelField>& pieces) {
  if (pieces.empty()) throw std::invalid_argument("nothing to compose");
  KernelField acc = pieces[0];
  for (std::size_t i = 1; i < pieces.size(); ++i) acc = star_product(acc, pieces[i]);
  return acc;
}

}  // namespace pathslice
