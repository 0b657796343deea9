#include "pathslice/geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "pathslice/fit.hpp"

namespace pathslice {

// ------------------------------------------------------------ CurvatureTensor

CurvatureTensor::CurvatureTensor(int dim)
    : n(dim), r(static_cast<std::size_t>(dim) * dim * dim * dim, 0.0), ricci(Eigen::MatrixXd::Zero(dim, dim)) {}

void CurvatureTensor::contract() {
  ricci.setZero();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) ricci(i, j) += (*this)(k, i, j, k);
  scalar = ricci.trace();
}

CurvatureTensor CurvatureTensor::rotated(const Eigen::MatrixXd& a) const {
  // Contract one index at a time to keep this O(n^5).
  CurvatureTensor out(n);
  std::vector<double> cur = r, next(r.size());
  for (int slot = 0; slot < 4; ++slot) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t idx = 0; idx < cur.size(); ++idx) {
      int ind[4] = {static_cast<int>(idx / (n * n * n)), static_cast<int>(idx / (n * n) % n),
                    static_cast<int>(idx / n % n), static_cast<int>(idx % n)};
      const double v = cur[idx];
      if (v == 0.0) continue;
      const int old = ind[slot];
      for (int b = 0; b < n; ++b) {
        ind[slot] = b;
        next[((ind[0] * n + ind[1]) * n + ind[2]) * n + ind[3]] += a(b, old) * v;
      }
    }
    std::swap(cur, next);
  }
  out.r = cur;
  out.contract();
  return out;
}

double CurvatureTensor::symmetry_defect() const {
  double worst = 0.0;
  const auto& R = *this;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          worst = std::max(worst, std::abs(R(i, j, k, l) + R(j, i, k, l)));
          worst = std::max(worst, std::abs(R(i, j, k, l) + R(i, j, l, k)));
          worst = std::max(worst, std::abs(R(i, j, k, l) - R(k, l, i, j)));
          worst = std::max(worst, std::abs(R(i, j, k, l) + R(j, k, i, l) + R(k, i, j, l)));
        }
  return worst;
}

// -------------------------------------------------------------- construction

namespace {

constexpr double kPi = std::numbers::pi;

int factor_tangent_dim(const Factor& f) {
  if (auto t = std::get_if<TorusFactor>(&f)) return static_cast<int>(t->lengths.size());
  return 2;
}

int factor_ambient_dim(const Factor& f) {
  if (auto t = std::get_if<TorusFactor>(&f)) return static_cast<int>(t->lengths.size());
  return 3;
}

double wrap(double d, double len) {
  d = std::fmod(d, len);
  if (d >= 0.5 * len) d -= len;
  if (d < -0.5 * len) d += len;
  return d;
}

Eigen::Vector3d rotate(const Eigen::Vector3d& v, const Eigen::Vector3d& k, double c, double s) {
  return v * c + k.cross(v) * s + k * (k.dot(v)) * (1.0 - c);
}

Eigen::Matrix<double, 3, 2> sphere_frame(const Eigen::Vector3d& p) {
  Eigen::Vector3d ref(0.0, 0.0, 1.0);
  Eigen::Vector3d e1 = ref - p.dot(ref) * p;
  if (e1.norm() < 1e-8) {
    ref = Eigen::Vector3d(1.0, 0.0, 0.0);
    e1 = ref - p.dot(ref) * p;
  }
  e1.normalize();
  Eigen::Matrix<double, 3, 2> f;
  f.col(0) = e1;
  f.col(1) = p.cross(e1);
  return f;
}

double sphere_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

// Sphere factor helpers work on unit vectors; lengths carry the radius.
Eigen::Vector3d sphere_exp(const Eigen::Vector3d& p, const Eigen::Vector2d& v, double radius) {
  const double len = v.norm();
  if (len == 0.0) return p;
  const double th = len / radius;
  const Eigen::Vector3d u = sphere_frame(p) * (v / len);
  Eigen::Vector3d q = std::cos(th) * p + std::sin(th) * u;
  return q.normalized();
}

Eigen::Vector2d sphere_log(const Eigen::Vector3d& y, const Eigen::Vector3d& x, double radius) {
  const double ang = sphere_angle(y, x);
  if (ang == 0.0) return Eigen::Vector2d::Zero();
  Eigen::Vector3d u = x - y.dot(x) * y;
  const double un = u.norm();
  if (un < 1e-14) {
    if (ang < 0.5 * std::numbers::pi) return Eigen::Vector2d::Zero();
    throw std::domain_error("log_map at an antipodal pair");
  }
  u /= un;
  return sphere_frame(y).transpose() * (radius * ang * u);
}

Eigen::Matrix2d sphere_transport(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  Eigen::Vector3d k = a.cross(b);
  const double s = k.norm();
  const double c = a.dot(b);
  Eigen::Matrix<double, 3, 2> fa = sphere_frame(a), fb = sphere_frame(b), moved;
  if (s == 0.0) {
    if (c < 0.0) throw std::domain_error("parallel transport between antipodal points");
    moved = fa;
  } else {
    k /= s;
    const double ang = std::atan2(s, c);
    for (int j = 0; j < 2; ++j) moved.col(j) = rotate(fa.col(j), k, std::cos(ang), std::sin(ang));
  }
  return fb.transpose() * moved;
}

Eigen::Matrix2d sphere_dexp(const Eigen::Vector3d& p, const Eigen::Vector2d& v, double radius) {
  const double len = v.norm();
  if (len == 0.0) return Eigen::Matrix2d::Identity();
  const double th = len / radius;
  const Eigen::Matrix<double, 3, 2> f = sphere_frame(p);
  const Eigen::Vector3d vh = f * (v / len);
  const Eigen::Vector3d q = sphere_exp(p, v, radius);
  const Eigen::Matrix<double, 3, 2> fq = sphere_frame(q);
  Eigen::Matrix2d j;
  for (int c = 0; c < 2; ++c) {
    const Eigen::Vector3d e = f.col(c);
    const double a = vh.dot(e);
    const Eigen::Vector3d img = -std::sin(th) * a * p + std::cos(th) * a * vh + std::sin(th) / th * (e - a * vh);
    j.col(c) = fq.transpose() * img;
  }
  return j;
}

}  // namespace

ModelManifold ModelManifold::torus(std::vector<double> lengths) {
  if (lengths.empty()) throw std::invalid_argument("torus needs at least one side length");
  for (double l : lengths)
    if (!(l > 0.0)) throw std::invalid_argument("torus side lengths must be positive");
  ModelManifold m;
  m.factors_.push_back(TorusFactor{std::move(lengths)});
  m.finish();
  return m;
}

ModelManifold ModelManifold::sphere2(double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("sphere radius must be positive");
  ModelManifold m;
  m.factors_.push_back(SphereFactor{radius});
  m.finish();
  return m;
}

ModelManifold ModelManifold::product(const std::vector<ModelManifold>& parts) {
  if (parts.empty()) throw std::invalid_argument("product needs factors");
  ModelManifold m;
  for (const auto& p : parts) m.factors_.insert(m.factors_.end(), p.factors_.begin(), p.factors_.end());
  m.finish();
  return m;
}

void ModelManifold::finish() {
  n_ = ambient_ = 0;
  tan_off_.clear();
  amb_off_.clear();
  for (const auto& f : factors_) {
    tan_off_.push_back(n_);
    amb_off_.push_back(ambient_);
    n_ += factor_tangent_dim(f);
    ambient_ += factor_ambient_dim(f);
  }
  if (n_ % 2) throw std::invalid_argument("manifold dimension must be even, got " + std::to_string(n_));
}

int ModelManifold::factor_dim(std::size_t f) const { return factor_tangent_dim(factors_[f]); }

ModelManifold ModelManifold::factor_manifold(std::size_t f) const {
  ModelManifold m;
  m.factors_ = {factors_.at(f)};
  m.finish();
  return m;
}

std::string ModelManifold::name() const {
  std::ostringstream s;
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    if (f) s << " x ";
    if (auto t = std::get_if<TorusFactor>(&factors_[f])) {
      s << "T^" << t->lengths.size();
    } else {
      s << "S^2(r=" << std::get<SphereFactor>(factors_[f]).radius << ")";
    }
  }
  return s.str();
}

bool ModelManifold::is_flat() const {
  for (const auto& f : factors_)
    if (std::holds_alternative<SphereFactor>(f)) return false;
  return true;
}

Point ModelManifold::canonical(const Point& p) const {
  Point q = p;
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    const int a = amb_off_[f];
    if (auto t = std::get_if<TorusFactor>(&factors_[f])) {
      for (std::size_t i = 0; i < t->lengths.size(); ++i) {
        double v = std::fmod(q[a + i], t->lengths[i]);
        if (v < 0.0) v += t->lengths[i];
        if (v >= t->lengths[i]) v = 0.0;
        q[a + i] = v;
      }
    } else {
      q.segment<3>(a).normalize();
    }
  }
  return q;
}

Point ModelManifold::random_point(std::mt19937_64& rng) const {
  Point p(ambient_);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    const int a = amb_off_[f];
    if (auto t = std::get_if<TorusFactor>(&factors_[f])) {
      for (std::size_t i = 0; i < t->lengths.size(); ++i) p[a + i] = u(rng) * t->lengths[i];
    } else {
      Eigen::Vector3d v(g(rng), g(rng), g(rng));
      p.segment<3>(a) = v.normalized();
    }
  }
  return p;
}

Eigen::MatrixXd ModelManifold::frame(const Point& p) const {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(ambient_, n_);
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    const int a = amb_off_[k], t = tan_off_[k];
    if (std::holds_alternative<TorusFactor>(factors_[k])) {
      const int d = factor_dim(k);
      f.block(a, t, d, d).setIdentity();
    } else {
      f.block<3, 2>(a, t) = sphere_frame(p.segment<3>(a));
    }
  }
  return f;
}

double ModelManifold::injectivity_radius() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& f : factors_) {
    if (auto t = std::get_if<TorusFactor>(&f)) {
      for (double l : t->lengths) r = std::min(r, 0.5 * l);
    } else {
      r = std::min(r, kPi * std::get<SphereFactor>(f).radius);
    }
  }
  return r;
}

double ModelManifold::volume() const {
  double v = 1.0;
  for (const auto& f : factors_) {
    if (auto t = std::get_if<TorusFactor>(&f)) {
      for (double l : t->lengths) v *= l;
    } else {
      const double r = std::get<SphereFactor>(f).radius;
      v *= 4.0 * kPi * r * r;
    }
  }
  return v;
}

double ModelManifold::distance(const Point& x, const Point& y) const {
  double s = 0.0;
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    const int a = amb_off_[k];
    if (auto t = std::get_if<TorusFactor>(&factors_[k])) {
      for (std::size_t i = 0; i < t->lengths.size(); ++i) {
        const double d = wrap(x[a + i] - y[a + i], t->lengths[i]);
        s += d * d;
      }
    } else {
      const double d = std::get<SphereFactor>(factors_[k]).radius * sphere_angle(x.segment<3>(a), y.segment<3>(a));
      s += d * d;
    }
  }
  return std::sqrt(s);
}

Point ModelManifold::exp_map(const Point& y, const Tangent& v) const {
  if (v.size() != n_) throw std::invalid_argument("tangent vector has wrong dimension");
  if (!(v.norm() < injectivity_radius())) throw std::domain_error("exp_map: |v| reaches the injectivity radius");
  Point x = y;
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    const int a = amb_off_[k], t = tan_off_[k];
    if (std::holds_alternative<TorusFactor>(factors_[k])) {
      const int d = factor_dim(k);
      x.segment(a, d) = y.segment(a, d) + v.segment(t, d);
    } else {
      x.segment<3>(a) = sphere_exp(y.segment<3>(a), v.segment<2>(t), std::get<SphereFactor>(factors_[k]).radius);
    }
  }
  return canonical(x);
}

Tangent ModelManifold::log_map(const Point& y, const Point& x) const {
  Tangent v(n_);
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    const int a = amb_off_[k], t = tan_off_[k];
    if (auto tor = std::get_if<TorusFactor>(&factors_[k])) {
      for (std::size_t i = 0; i < tor->lengths.size(); ++i)
        v[t + i] = wrap(x[a + i] - y[a + i], tor->lengths[i]);
    } else {
      v.segment<2>(t) = sphere_log(y.segment<3>(a), x.segment<3>(a), std::get<SphereFactor>(factors_[k]).radius);
    }
  }
  if (!(v.norm() < injectivity_radius())) throw std::domain_error("log_map: points are beyond the injectivity radius");
  return v;
}

Eigen::MatrixXd ModelManifold::parallel_transport(const Point& from, const Point& to) const {
  Eigen::MatrixXd tr = Eigen::MatrixXd::Identity(n_, n_);
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    if (std::holds_alternative<SphereFactor>(factors_[k])) {
      const int a = amb_off_[k], t = tan_off_[k];
      tr.block<2, 2>(t, t) = sphere_transport(from.segment<3>(a), to.segment<3>(a));
    }
  }
  return tr;
}

Eigen::MatrixXd ModelManifold::dexp_frame(const Point& y, const Tangent& v) const {
  Eigen::MatrixXd j = Eigen::MatrixXd::Identity(n_, n_);
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    if (std::holds_alternative<SphereFactor>(factors_[k])) {
      const int a = amb_off_[k], t = tan_off_[k];
      j.block<2, 2>(t, t) =
          sphere_dexp(y.segment<3>(a), v.segment<2>(t), std::get<SphereFactor>(factors_[k]).radius);
    }
  }
  return j;
}

CurvatureTensor ModelManifold::curvature(const Point&) const {
  CurvatureTensor c(n_);
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    if (auto s = std::get_if<SphereFactor>(&factors_[k])) {
      const double kg = 1.0 / (s->radius * s->radius);
      const int o = tan_off_[k];
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              c(o + i, o + j, o + a, o + b) = kg * ((j == a) * (i == b) - (i == a) * (j == b));
    }
  }
  c.contract();
  return c;
}

// ---------------------------------------------------------------- oracles

Point rk4_sphere_geodesic(const Point& y, const Eigen::Vector3d& velocity, double time, int steps) {
  // p'' = -|p'|^2 p on the unit sphere
  using State = Eigen::Matrix<double, 6, 1>;
  auto rhs = [](const State& s) {
    State d;
    d.head<3>() = s.tail<3>();
    d.tail<3>() = -s.tail<3>().squaredNorm() * s.head<3>();
    return d;
  };
  State s;
  s.head<3>() = y.head<3>();
  s.tail<3>() = velocity;
  const double h = time / steps;
  for (int i = 0; i < steps; ++i) {
    State k1 = rhs(s), k2 = rhs(s + 0.5 * h * k1), k3 = rhs(s + 0.5 * h * k2), k4 = rhs(s + h * k3);
    s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return s.head<3>();
}

// ---------------------------------------------------------- RNC expansions

RncData rnc_data(const ModelManifold& m, const Point& y, const Tangent& v, double fd_step) {
  const int n = m.dim();
  auto metric = [&](const Tangent& w) {
    Eigen::MatrixXd j = m.dexp_frame(y, w);
    return Eigen::MatrixXd(j.transpose() * j);
  };
  RncData d;
  d.g = metric(v);
  d.ginv = d.g.inverse();
  const Point x = m.exp_map(y, v);
  d.pt = m.dexp_frame(y, v).transpose() * m.parallel_transport(y, x);
  // ∂_m g_ij by fourth-order central differences
  std::vector<Eigen::MatrixXd> dg(n);
  for (int a = 0; a < n; ++a) {
    Tangent e = Tangent::Zero(n);
    e[a] = fd_step;
    dg[a] = (-metric(v + 2 * e) + 8.0 * metric(v + e) - 8.0 * metric(v - e) + metric(v - 2 * e)) / (12.0 * fd_step);
  }
  d.gamma.assign(static_cast<std::size_t>(n) * n * n, 0.0);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += d.ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        d.gamma[(k * n + i) * n + j] = 0.5 * s;
      }
  return d;
}

namespace {

struct RncPrediction {
  std::vector<double> g, ginv, gamma, pt;  // deviations from the flat values
};

RncPrediction predict(const CurvatureTensor& R, const Tangent& x) {
  const int n = R.n;
  RncPrediction p;
  p.g.assign(n * n, 0.0);
  p.ginv.assign(n * n, 0.0);
  p.pt.assign(n * n, 0.0);
  p.gamma.assign(n * n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          p.g[i * n + j] += R(i, k, j, l) * x[k] * x[l] / 3.0;
          p.ginv[i * n + j] -= R(k, i, l, j) * x[k] * x[l] / 3.0;
          p.pt[i * n + j] += R(i, k, j, l) * x[k] * x[l] / 6.0;
        }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
          p.gamma[(k * n + i) * n + j] -= (R(i, l, j, k) + R(j, l, i, k)) * x[l] / 3.0;
  return p;
}

std::vector<double> flatten_dev(const Eigen::MatrixXd& a) {
  std::vector<double> v(a.size());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) v[i * a.cols() + j] = a(i, j) - (i == j ? 1.0 : 0.0);
  return v;
}

std::vector<Tangent> probe_directions(int n) {
  std::vector<Tangent> dirs;
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < 8; ++k) {
    Tangent u(n);
    if (n == 2) {
      const double a = 2.0 * kPi * (k + 0.3) / 8.0;
      u << std::cos(a), std::sin(a);
    } else {
      for (int i = 0; i < n; ++i) u[i] = g(rng);
      u.normalize();
    }
    dirs.push_back(u);
  }
  return dirs;
}

}  // namespace

std::vector<RncTermReport> rnc_expansion_check(const ModelManifold& m, const Point& y, double h_fit,
                                               const std::vector<double>& h_sweep) {
  const CurvatureTensor R = m.curvature(y);
  const auto dirs = probe_directions(m.dim());
  const char* names[4] = {"g", "ginv", "gamma", "pt"};
  const int orders[4] = {3, 3, 2, 3};

  auto measure = [&](const Tangent& x, double h) {
    const RncData d = rnc_data(m, y, x, 1e-3 * h);
    std::array<std::vector<double>, 4> meas = {flatten_dev(d.g), flatten_dev(d.ginv), d.gamma, flatten_dev(d.pt)};
    const RncPrediction p = predict(R, x);
    std::array<std::vector<double>, 4> pred = {p.g, p.ginv, p.gamma, p.pt};
    return std::make_pair(meas, pred);
  };

  std::vector<RncTermReport> out(4);
  for (int t = 0; t < 4; ++t) {
    out[t].term = names[t];
    out[t].stated_order = orders[t];
  }
  std::array<double, 4> num{}, den{};
  for (const auto& u : dirs) {
    auto [meas, pred] = measure(h_fit * u, h_fit);
    for (int t = 0; t < 4; ++t)
      for (std::size_t i = 0; i < meas[t].size(); ++i) {
        num[t] += meas[t][i] * pred[t][i];
        den[t] += pred[t][i] * pred[t][i];
      }
  }
  for (int t = 0; t < 4; ++t) out[t].coefficient = den[t] > 0.0 ? num[t] / den[t] : 0.0;

  for (double h : h_sweep) {
    std::array<double, 4> worst{};
    for (const auto& u : dirs) {
      auto [meas, pred] = measure(h * u, h);
      for (int t = 0; t < 4; ++t)
        for (std::size_t i = 0; i < meas[t].size(); ++i)
          worst[t] = std::max(worst[t], std::abs(meas[t][i] - pred[t][i]));
    }
    for (int t = 0; t < 4; ++t) {
      out[t].h.push_back(h);
      out[t].remainder.push_back(worst[t]);
    }
  }
  for (auto& r : out) r.slope = loglog_slope(r.h, r.remainder);
  return out;
}

double distance_defect(const ModelManifold& m, const Point& z, const Tangent& xv, const Tangent& yv) {
  const Point x = m.exp_map(z, xv), y = m.exp_map(z, yv);
  const double d = m.distance(x, y);
  return d * d - (xv - yv).squaredNorm();
}

}  // namespace pathslice
