#include "pathslice/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pathslice {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
using Block = TripleGrassmann::Block;

// Σ_ijkl R_ijkl ψ^i ψ^j ρ'_l ρ'_k with ρ'_l = Σ_m ρ_m A_ml and ψ taken from the given block.
TripleGrassmann curvature_quartic(const CurvatureTensor& r, Block psi, const Eigen::MatrixXd& a) {
  const int n = r.n;
  std::vector<TripleGrassmann> rho(n, TripleGrassmann(n));
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m)
      if (a(m, l) != 0.0) rho[l] += TripleGrassmann::generator(n, Block::Rho, m + 1, a(m, l));
  TripleGrassmann out(n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      TripleGrassmann q(n);
      bool any = false;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double c = r(i, j, k, l);
          if (c == 0.0 || i == j) continue;
          q += TripleGrassmann::generator(n, psi, i + 1, c) * TripleGrassmann::generator(n, psi, j + 1);
          any = true;
        }
      if (any) out += q * (rho[l] * rho[k]);
    }
  return out;
}

double gaussian(int n, double d2, double t) { return std::pow(kTwoPi * t, -0.5 * n) * std::exp(-d2 / (2.0 * t)); }

}  // namespace

double support_radius(const ModelManifold& m) { return m.injectivity_radius() * (1.0 - 1e-9); }

double cutoff_radius(const ModelManifold& m, double t, double c) {
  return std::min(support_radius(m), c * std::sqrt(t * std::max(1.0, std::log(1.0 / t))));
}

double gaussian_H(const ModelManifold& m, const Point& x, const Point& y, double t, double cutoff_c) {
  if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
  const double d = m.distance(x, y);
  if (d >= cutoff_radius(m, t, cutoff_c)) return 0.0;
  return gaussian(m.dim(), d * d, t);
}

FormEndomorphism PointPairKernel::matrix() const {
  const int n = lbar.dim();
  if (zero) return FormEndomorphism(n);
  return lbar * pullback() * prefactor;
}

PointPairKernel transport_kernel_P(const ModelManifold& m, const Point& x, const Point& y) {
  PointPairKernel k(m.dim());
  k.x = x;
  k.y = y;
  if (!(m.distance(x, y) < support_radius(m))) {
    k.transport = Eigen::MatrixXd::Identity(m.dim(), m.dim());
    return k;
  }
  k.zero = false;
  k.prefactor = 1.0;
  k.transport = m.parallel_transport(x, y);
  k.lbar = FormEndomorphism::identity(m.dim());
  return k;
}

TripleGrassmann k_exponent(double t, const CurvatureTensor& ry, const CurvatureTensor& rx,
                           const Eigen::MatrixXd& transport, double scalar) {
  const int n = ry.n;
  TripleGrassmann e = TripleGrassmann::scalar(n, scalar);
  const cplx i1(0.0, 1.0);
  for (int l = 0; l < n; ++l) {
    TripleGrassmann theta(n);
    for (int a = 0; a < n; ++a)
      if (transport(l, a) != 0.0) theta += TripleGrassmann::generator(n, Block::PsiX, a + 1, transport(l, a));
    theta += TripleGrassmann::generator(n, Block::PsiY, l + 1, -1.0);
    e += TripleGrassmann::generator(n, Block::Rho, l + 1, i1) * theta;
  }
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  e += curvature_quartic(ry, Block::PsiY, id) * cplx(t / 8.0);
  e += curvature_quartic(rx, Block::PsiX, transport) * cplx(t / 8.0);
  return e;
}

FormEndomorphism fermionic_kernel(double t, const CurvatureTensor& ry, const CurvatureTensor& rx,
                                  const Eigen::MatrixXd& transport) {
  const TripleGrassmann e = k_exponent(t, ry, rx, transport, 0.0);
  return kernel_to_endomorphism(berezin(exp_nilpotent(e), Block::Rho));
}

PointPairKernel approximate_K(const ModelManifold& m, const Point& x, const Point& y, double t,
                              const KernelOptions& opt) {
  if (!(t > 0.0)) throw std::invalid_argument("approximate_K needs t > 0");
  const int n = m.dim();
  PointPairKernel k(n);
  k.x = x;
  k.y = y;
  k.t = t;
  const double d = m.distance(x, y);
  if (d >= cutoff_radius(m, t, opt.cutoff_c)) {
    k.transport = Eigen::MatrixXd::Identity(n, n);
    return k;
  }
  const Tangent v = m.log_map(y, x);
  const CurvatureTensor ry = m.curvature(y), rx = m.curvature(x);
  k.transport = m.parallel_transport(x, y);
  double scalar = -t * ry.scalar / 6.0;
  if (opt.ricci_term) scalar += v.dot(ry.ricci * v) / 12.0;
  const TripleGrassmann e = k_exponent(t, ry, rx, k.transport, scalar);
  const FormEndomorphism mk = kernel_to_endomorphism(berezin(exp_nilpotent(e), Block::Rho));
  k.zero = false;
  k.prefactor = gaussian(n, v.squaredNorm(), t);
  k.lbar = mk * exterior_power(k.transport);
  return k;
}

PointPairKernel approximate_K_rnc(const ModelManifold& m, const Point& x, const Point& y, double t,
                                  const KernelOptions& opt) {
  if (!(t > 0.0)) throw std::invalid_argument("approximate_K_rnc needs t > 0");
  const int n = m.dim();
  PointPairKernel k(n);
  k.x = x;
  k.y = y;
  k.t = t;
  k.transport = Eigen::MatrixXd::Identity(n, n);
  const double d = m.distance(x, y);
  if (d >= cutoff_radius(m, t, opt.cutoff_c)) return k;
  const Tangent v = m.log_map(y, x);
  const CurvatureTensor r = m.curvature(y);
  double scalar = -t * r.scalar / 6.0;
  if (opt.ricci_term) scalar += v.dot(r.ricci * v) / 12.0;
  TripleGrassmann e = k_exponent(t, r, r, Eigen::MatrixXd::Identity(n, n), scalar);
  // (i/6) <ρ, R[v, ψ_x] v> = (i/6) Σ R_ijkl v^i v^k ρ_l ψ_x^j
  const cplx coef(0.0, 1.0 / 6.0);
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j) {
      double c = 0.0;
      for (int i = 0; i < n; ++i)
        for (int kk = 0; kk < n; ++kk) c += r(i, j, kk, l) * v[i] * v[kk];
      if (c != 0.0)
        e += TripleGrassmann::generator(n, Block::Rho, l + 1, coef * c) *
             TripleGrassmann::generator(n, Block::PsiX, j + 1);
    }
  k.zero = false;
  k.prefactor = gaussian(n, v.squaredNorm(), t);
  k.lbar = kernel_to_endomorphism(berezin(exp_nilpotent(e), Block::Rho));
  return k;
}

FormEndomorphism rnc_components(const ModelManifold& m, const Point& x, const Point& y, const FormEndomorphism& mxy) {
  const Eigen::MatrixXd j = m.dexp_frame(y, m.log_map(y, x));
  return exterior_power(j.transpose()) * mxy;
}

// ------------------------------------------------------------ operators

Eigen::MatrixXd creation(int n, int mi) {
  const int s = 1 << n;
  const Mask bit = Mask{1} << (mi - 1);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(s, s);
  for (Mask i = 0; i < static_cast<Mask>(s); ++i) {
    const int sg = reorder_sign(bit, i);
    if (sg) c(i | bit, i) = sg;
  }
  return c;
}

Eigen::MatrixXd annihilation(int n, int k) {
  const int s = 1 << n;
  const Mask bit = Mask{1} << (k - 1);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(s, s);
  for (Mask i = 0; i < static_cast<Mask>(s); ++i)
    if (i & bit) a(i & ~bit, i) = reorder_sign(bit, i & ~bit);
  return a;
}

Eigen::MatrixXd curvature_action(const CurvatureTensor& r) {
  const int n = r.n, s = 1 << n;
  std::vector<Eigen::MatrixXd> c(n), a(n);
  for (int i = 0; i < n; ++i) {
    c[i] = creation(n, i + 1);
    a[i] = annihilation(n, i + 1);
  }
  Eigen::MatrixXd o = Eigen::MatrixXd::Zero(s, s);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double v = r(i, j, k, l);
          if (v != 0.0) o += v * a[l] * c[i] * c[j] * a[k];
        }
  return 0.5 * o;
}

HeatOperatorParams::HeatOperatorParams(double fd, double dt) : fd_delta(fd), dt_delta(dt) {
  if (!(fd > 0.0 && fd < 1.0)) throw std::invalid_argument("fd_delta must lie in (0, 1)");
  if (!(dt > 0.0 && dt < 1.0)) throw std::invalid_argument("dt_delta must lie in (0, 1)");
}

Eigen::MatrixXd laplace_de_rham_apply(const ModelManifold& m, const FormField& f, const Point& x, double h) {
  const int n = m.dim();
  if (!(h > 0.0) || 2.0 * h >= m.injectivity_radius()) throw std::invalid_argument("stencil step is under-resolved");
  static constexpr double c[5] = {-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0};
  const Eigen::MatrixXd f0 = f(x);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(f0.rows(), f0.cols());
  for (int i = 0; i < n; ++i)
    for (int o = -2; o <= 2; ++o) {
      if (o == 0) {
        acc += c[2] * f0;
        continue;
      }
      Tangent v = Tangent::Zero(n);
      v[i] = o * h;
      const Eigen::MatrixXd j = m.dexp_frame(x, v);
      acc += c[o + 2] * (exterior_power(j.transpose()).matrix() * f(m.exp_map(x, v)));
    }
  acc /= h * h;
  const CurvatureTensor r = m.curvature(x);
  Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(1 << n, 1 << n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (r.ricci(a, b) != 0.0) ric += r.ricci(a, b) * creation(n, a + 1) * annihilation(n, b + 1);
  return -acc - (ric * f0) / 3.0 + curvature_action(r) * f0;
}

HeatResidual heat_residual(const ModelManifold& m, const Point& x, const Point& y, double t,
                           const HeatOperatorParams& params, const KernelOptions& opt) {
  const int n = m.dim();
  if (3.0 * params.dt_delta >= 1.0) throw std::invalid_argument("dt_delta must stay below 1/3 for the time stencil");
  const double h = params.fd_delta * std::sqrt(t);
  const double ht = params.dt_delta * t;
  FormField kx = [&](const Point& p) { return approximate_K(m, p, y, t, opt).matrix().matrix(); };
  const Eigen::MatrixXd lap = laplace_de_rham_apply(m, kx, x, h);
  static constexpr double w[3] = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
  Eigen::MatrixXd dt = Eigen::MatrixXd::Zero(1 << n, 1 << n);
  for (int o = 1; o <= 3; ++o)
    dt += w[o - 1] * (approximate_K(m, x, y, t + o * ht, opt).matrix().matrix() -
                      approximate_K(m, x, y, t - o * ht, opt).matrix().matrix());
  dt /= ht;
  const Eigen::MatrixXd rm = dt + 0.5 * lap;
  HeatResidual out(n);
  out.residual = FormEndomorphism(n, rm * exterior_power(m.parallel_transport(x, y)).matrix());
  out.H = gaussian_H(m, x, y, t, opt.cutoff_c);
  out.near_diagonal = out.H > t * std::pow(kTwoPi * t, -0.5 * n);
  if (out.near_diagonal) out.f1 = out.residual * (1.0 / out.H);
  return out;
}

// ---------------------------------------------------------- flat chart

FlatChartResidual flat_chart_K012_residual(const FlatChartInput& in, const Eigen::VectorXd& x, double t,
                                           const HeatOperatorParams& params) {
  const CurvatureTensor& R = in.R;
  const int n = R.n;
  const Eigen::VectorXd a = in.a.size() == n ? in.a : Eigen::VectorXd::Zero(n);
  const Eigen::MatrixXd hm = in.H.rows() == n ? in.H : Eigen::MatrixXd::Zero(n, n);
  auto f = [&](const Eigen::VectorXd& p) { return in.C * std::cos(a.dot(p)); };
  auto k0 = [&](const Eigen::VectorXd& p, double s) {
    return std::pow(kTwoPi * s, -0.5 * n) *
           std::exp(-p.squaredNorm() / (2.0 * s) + p.dot(R.ricci * p) / 12.0 + s * R.scalar / 12.0);
  };
  auto k1 = [&](const Eigen::VectorXd& p, double s) {
    return k0(p, s) * std::exp(0.5 * s * (f(p) + f(Eigen::VectorXd::Zero(n))));
  };
  auto k2 = [&](const Eigen::VectorXd& p, double s) { return k1(p, s) * std::exp(-0.5 * in.D * p.dot(hm * p)); };

  // truncated metric and its Christoffel symbols at x
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
  std::vector<Eigen::MatrixXd> dg(n, Eigen::MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          g(i, j) += R(i, k, j, l) * x[k] * x[l] / 3.0;
          // ∂_m g_ij = (1/3)(R_imjl x^l + R_ikjm x^k)
          dg[k](i, j) += (R(i, k, j, l) + R(i, l, j, k)) * x[l] / 3.0;
        }
  const Eigen::MatrixXd gi = g.inverse();
  std::vector<double> gam(n * n * n, 0.0);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += gi(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        gam[(k * n + i) * n + j] = 0.5 * s;
      }

  const double hs = params.fd_delta * std::sqrt(t);
  const double ht = params.dt_delta * t;
  auto residual = [&](auto&& K, int level) {
    const double k = K(x, t);
    Eigen::VectorXd grad(n);
    Eigen::MatrixXd hess(n, n);
    auto e = [&](int i) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
      v[i] = hs;
      return v;
    };
    // sixth-order central stencils
    static constexpr double c1[3] = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
    static constexpr double c2[4] = {-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0};
    static constexpr double cm[3] = {1.5, -0.6, 0.1};
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd ei = e(i);
      grad[i] = 0.0;
      hess(i, i) = c2[0] * k;
      for (int o = 1; o <= 3; ++o) {
        const double kp = K(x + o * ei, t), km = K(x - o * ei, t);
        grad[i] += c1[o - 1] * (kp - km);
        hess(i, i) += c2[o] * (kp + km);
      }
      grad[i] /= hs;
      hess(i, i) /= hs * hs;
      for (int j = 0; j < i; ++j) {
        const Eigen::VectorXd ej = e(j);
        auto mixed = [&](double s) {
          return (K(x + s * (ei + ej), t) - K(x + s * (ei - ej), t) - K(x - s * (ei - ej), t) +
                  K(x - s * (ei + ej), t)) /
                 (4 * s * s * hs * hs);
        };
        hess(i, j) = hess(j, i) = cm[0] * mixed(1.0) + cm[1] * mixed(2.0) + cm[2] * mixed(3.0);
      }
    }
    double dt = 0.0;
    static constexpr double w[3] = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
    for (int o = 1; o <= 3; ++o) dt += w[o - 1] * (K(x, t + o * ht) - K(x, t - o * ht));
    dt /= ht;
    double lap = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = hess(i, j);
        for (int kk = 0; kk < n; ++kk) s -= gam[(kk * n + i) * n + j] * grad[kk];
        lap += 0.5 * gi(i, j) * s;
      }
    if (level >= 1) lap += f(x) * k;
    if (level >= 2) lap += in.D * (x.dot(hm * grad) + 0.5 * hm.trace() * k);
    return std::abs(dt - lap) / k;
  };
  FlatChartResidual out;
  out.k0 = residual(k0, 0);
  out.k1 = residual(k1, 1);
  out.k2 = residual(k2, 2);
  return out;
}

}  // namespace pathslice
