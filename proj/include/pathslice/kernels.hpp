#pragma once

#include <functional>
#include <vector>

#include "pathslice/exterior.hpp"
#include "pathslice/geometry.hpp"

namespace pathslice {

struct KernelOptions {
  double cutoff_c = 6.0;
  bool ricci_term = true;  // false gives the negative-control kernel without the Ricci scalar
};

// Kernels are supported on d(x, y) < inj (1 - 1e-9); the cut point set is excluded.
double support_radius(const ModelManifold& m);

// min(support radius, c * sqrt(t * max(1, log(1/t))))
double cutoff_radius(const ModelManifold& m, double t, double c);

// (2πt)^{-n/2} exp(-d²/2t) inside the cutoff radius, 0 outside.
double gaussian_H(const ModelManifold& m, const Point& x, const Point& y, double t, double cutoff_c = 6.0);

// Kernel for a pair: M(x,y) = prefactor * lbar * Λ(Tᵀ) maps frame components at y to frame
// components at x. transport is T_xy (pt from x to y) and Λ(Tᵀ) is the pullback by it.
struct PointPairKernel {
  explicit PointPairKernel(int n) : lbar(n) {}

  Point x, y;
  double t = 0.0;
  bool zero = true;
  double prefactor = 0.0;
  Eigen::MatrixXd transport;
  FormEndomorphism lbar;

  FormEndomorphism pullback() const { return exterior_power(transport.transpose()); }
  FormEndomorphism matrix() const;
};

PointPairKernel transport_kernel_P(const ModelManifold& m, const Point& x, const Point& y);

// Berezin ρ-integral of exp(i<ρ, Tψ_x - ψ_y> + t/8 (ρ, R_y[ψ_y,ψ_y] ρ) + t/8 (pt*ρ, R_x[ψ_x,ψ_x] pt*ρ)),
// returned as the endomorphism it defines. T is the transport x → y.
FormEndomorphism fermionic_kernel(double t, const CurvatureTensor& ry, const CurvatureTensor& rx,
                                  const Eigen::MatrixXd& transport);
// The exponent above plus a scalar, as a polynomial.
TripleGrassmann k_exponent(double t, const CurvatureTensor& ry, const CurvatureTensor& rx,
                           const Eigen::MatrixXd& transport, double scalar);

PointPairKernel approximate_K(const ModelManifold& m, const Point& x, const Point& y, double t,
                              const KernelOptions& opt = {});

// Normal-coordinate form about y. ψ_x refers to the coordinate basis of RNC at x, so the result
// has identity transport and is compared against rnc_components(approximate_K).
PointPairKernel approximate_K_rnc(const ModelManifold& m, const Point& x, const Point& y, double t,
                                  const KernelOptions& opt = {});
// Re-express the x-slot of M(x,y) from the frame at x in the RNC coordinate basis about y.
FormEndomorphism rnc_components(const ModelManifold& m, const Point& x, const Point& y, const FormEndomorphism& mxy);

// Creation ψ^m and annihilation ∂/∂ψ^k on Λ*R^n (1-based indices).
Eigen::MatrixXd creation(int n, int m);
Eigen::MatrixXd annihilation(int n, int k);
// ½ (∂/∂ψ, R[ψ,ψ] ∂/∂ψ) = ½ Σ R_ijkl ∂_l ψ^i ψ^j ∂_k
Eigen::MatrixXd curvature_action(const CurvatureTensor& r);

struct HeatOperatorParams {
  HeatOperatorParams(double fd = 0.05, double dt = 0.05);
  double fd_delta;
  double dt_delta;
};

// Form field sampled at a point: 2^n rows of frame components, any number of columns.
using FormField = std::function<Eigen::MatrixXd(const Point&)>;

// Δ_LdR at x by fourth-order central differences in normal coordinates at x with step h.
Eigen::MatrixXd laplace_de_rham_apply(const ModelManifold& m, const FormField& f, const Point& x, double h);

struct HeatResidual {
  explicit HeatResidual(int n) : residual(n), f1(n) {}
  FormEndomorphism residual;  // (∂_t + ½Δ_x) K with the pullback removed
  double H = 0.0;
  bool near_diagonal = false;  // H > t (2πt)^{-n/2}
  FormEndomorphism f1;         // residual / H when near the diagonal
};

HeatResidual heat_residual(const ModelManifold& m, const Point& x, const Point& y, double t,
                           const HeatOperatorParams& params, const KernelOptions& opt = {});

// Synthetic normal-coordinate chart: metric δ + (1/3) R_ikjl x^k x^l, potential f(x) = C cos(a·x)
// and drift coefficients h_k^l = D H_kl. Returns the relative residuals of K_0, K_1, K_2.
struct FlatChartInput {
  CurvatureTensor R{2};
  double C = 0.0;
  Eigen::VectorXd a;   // frequency of f
  double D = 0.0;
  Eigen::MatrixXd H;   // unit drift pattern
};

struct FlatChartResidual {
  double k0 = 0.0, k1 = 0.0, k2 = 0.0;
};

FlatChartResidual flat_chart_K012_residual(const FlatChartInput& in, const Eigen::VectorXd& x, double t,
                                           const HeatOperatorParams& params);

}  // namespace pathslice
