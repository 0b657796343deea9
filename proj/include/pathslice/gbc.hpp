#pragma once

#include <vector>

#include "pathslice/exterior.hpp"
#include "pathslice/geometry.hpp"
#include "pathslice/kernels.hpp"
#include "pathslice/pathintegral.hpp"

namespace pathslice {

// Top ψ-coefficient of ∫ exp(¼ (ρ, R[ψ,ψ] ρ)) dρ.
double pfaffian_berezin(const CurvatureTensor& r);
// Pf of the 2-form matrix Ω_kl = ½ Σ_ij R_ijlk ψ^i ψ^j by row expansion, top coefficient.
double pfaffian_combinatorial(const CurvatureTensor& r);
double pfaffian_curvature(const ModelManifold& m, const Point& x);

struct SupertraceField {
  GridPtr grid;
  double t = 0.0;
  std::vector<double> values;
  double integral() const;  // Σ_x w_x str
};

SupertraceField supertrace_diagonal(const KernelField& l);

struct GbcScan {
  std::vector<double> t;
  std::vector<double> closed;  // str of K(x,x;t), closed form
  double limit = 0.0;          // Richardson extrapolation to t = 0
  double target = 0.0;         // (2π)^{-n/2} Pf(R)
  double deviation = 0.0;
};

// Closed-form path of the small-t limit of the diagonal supertrace.
GbcScan gbc_limit_scan(const ModelManifold& m, const Point& x, const std::vector<double>& ts,
                       const KernelOptions& opt = {});

// Σ_x w_x str K^{*P}(x,x;t) for the uniform dyadic partition of the given depth.
double euler_characteristic_estimate(const GridPtr& grid, double t, int depth,
                                     FieldKind kind = FieldKind::Approximate, const KernelOptions& opt = {});
// Same estimate for a product manifold from one grid per factor; the supertrace of a graded
// tensor product of kernels is the product of the factor supertraces.
double euler_characteristic_factorized(const std::vector<GridPtr>& factor_grids, double t, int depth,
                                       FieldKind kind = FieldKind::Approximate, const KernelOptions& opt = {});
int euler_characteristic_exact(const ModelManifold& m);

// Largest deviation between approximate_K on a product and the Kronecker product of the factor kernels
// over the given point pairs.
double product_kernel_defect(const ModelManifold& m, const std::vector<std::pair<Point, Point>>& pairs, double t,
                             const KernelOptions& opt = {});

struct ErrorSupertraceReport {
  std::vector<double> t;
  std::vector<double> max_abs_str;  // max_x |str (K^{*P} - K)(x,x;t)|
  std::vector<double> integral;     // Σ_x w_x str (K^{*P} - K)(x,x;t)
  double exponent = 0.0;            // fitted t-exponent of max_abs_str
};

ErrorSupertraceReport error_supertrace_decay(const GridPtr& grid, const std::vector<double>& ts, int depth,
                                             FieldKind kind = FieldKind::Approximate, const KernelOptions& opt = {});

}  // namespace pathslice
