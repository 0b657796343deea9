#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pathslice/exterior.hpp"
#include "pathslice/geometry.hpp"
#include "pathslice/kernels.hpp"

namespace pathslice {

class QuadratureGrid {
 public:
  // Uniform N per side on a torus; weight = cell volume.
  static QuadratureGrid torus_uniform(const ModelManifold& m, int per_side);
  // Gauss-Legendre nodes in z times uniform longitudes (spectrally accurate on S²).
  static QuadratureGrid sphere_gauss_legendre(const ModelManifold& m, int nlat, int nlon);
  // Fibonacci lattice with equal-area weights.
  static QuadratureGrid sphere_fibonacci(const ModelManifold& m, int count);
  // Tensor product of factor grids.
  static QuadratureGrid product(const ModelManifold& m, const std::vector<QuadratureGrid>& parts);

  const ModelManifold& manifold() const { return manifold_; }
  std::size_t size() const { return points_.size(); }
  const Point& point(std::size_t i) const { return points_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  double total_weight() const;
  std::string description() const { return description_; }
  // Symmetric neighbor lists: j is listed for i iff d(i, j) < radius.
  std::vector<std::vector<int>> neighbors(double radius) const;

 private:
  explicit QuadratureGrid(ModelManifold m) : manifold_(std::move(m)) {}
  ModelManifold manifold_;
  std::vector<Point> points_;
  std::vector<double> weights_;
  std::string description_;
};

using GridPtr = std::shared_ptr<const QuadratureGrid>;

enum class FieldKind {
  Transport,         // P
  GaussianTransport, // H P
  Approximate,       // K
  ApproximateNoRicci,
  ExactTorus,        // image-sum heat kernel times P
};

// Grid-sampled kernel. Stores M(x,y) = L̄(x,y) pt*_{xy} for each degree sector d as the
// C(n,d)² component planes, each a dense G×G matrix (row x, column y). A plane that is
// identically zero is not stored. Pairs at distance ≥ radius are zero.
class KernelField {
 public:
  using Plane = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  KernelField(GridPtr grid, double t, double radius);

  const GridPtr& grid() const { return grid_; }
  int dim() const { return n_; }
  double t() const { return t_; }
  double radius() const { return radius_; }
  std::size_t size() const { return grid_->size(); }

  bool has_plane(int d, int a, int b) const;
  const Plane& plane(int d, int a, int b) const;
  Plane& mutable_plane(int d, int a, int b);  // allocates a zero plane when absent
  void drop_zero_planes();
  std::size_t stored_planes() const;

  FormEndomorphism at(std::size_t x, std::size_t y) const;  // M(x,y)
  void set(std::size_t x, std::size_t y, const FormEndomorphism& e);

  KernelField operator-(const KernelField& o) const;
  KernelField scaled(double s) const;
  // Zero every pair at distance ≥ r.
  void truncate(double r);

 private:
  int index(int d, int a, int b) const;
  GridPtr grid_;
  int n_;
  double t_;
  double radius_;
  std::vector<int> offsets_;  // first plane of each sector
  std::vector<std::optional<Plane>> planes_;
};

KernelField make_field(const GridPtr& grid, double t, FieldKind kind, const KernelOptions& opt = {});

// (L1 * L2)(x,z) = Σ_y w_y M1(x,y) M2(y,z); time label t1 + t2; cut at the combined radius.
KernelField star_product(const KernelField& a, const KernelField& b, const KernelOptions& opt = {});

// Form fields: G × 2^n, row x holds frame components at point x.
using FormSamples = Eigen::MatrixXd;
FormSamples apply_to_form(const KernelField& l, const FormSamples& f);

class Partition {
 public:
  explicit Partition(std::vector<double> slices);
  static Partition uniform(double t, int pieces);
  static Partition dyadic(double t, int depth) { return uniform(t, 1 << depth); }

  const std::vector<double>& slices() const { return slices_; }
  double total() const;
  double mesh() const;
  // Split every slice into `pieces` equal parts.
  Partition refine(int pieces) const;

 private:
  std::vector<double> slices_;
};

// Left fold K(t1) * K(t2) * ... * K(tm).
KernelField k_star_partition(const GridPtr& grid, const Partition& p, FieldKind kind = FieldKind::Approximate,
                             const KernelOptions& opt = {});
// Same product for uniform dyadic partitions through repeated squaring.
KernelField k_star_dyadic(const GridPtr& grid, double t, int depth, FieldKind kind = FieldKind::Approximate,
                          const KernelOptions& opt = {});
// Balanced-tree bracketing of the same product, used to check fold-order invariance.
KernelField k_star_balanced(const GridPtr& grid, const Partition& p, FieldKind kind = FieldKind::Approximate,
                            const KernelOptions& opt = {});

struct KernelNormParams {
  KernelNormParams(double D, double epsilon, double t);
  double D;
  double epsilon;
  double t;
};

// max over stored pairs of |L̄(x,y)|_t / (H(x,y;t) + D t).
double kernel_norm_t(const KernelField& l, const KernelNormParams& p, const KernelOptions& opt = {});

// The field norm of K(t1) * K(t2) - K(t1 + t2).
double semigroup_defect(const GridPtr& grid, double t1, double t2, const KernelNormParams& p,
                        FieldKind kind = FieldKind::Approximate, const KernelOptions& opt = {});

struct RefinementReport {
  double t;
  std::vector<int> depths;
  std::vector<double> successive;  // ‖K^{*P_{d+1}} - K^{*P_d}‖_t, one per consecutive pair
  double deepest_vs_K = 0.0;       // ‖K^{*P_deepest} - K(t)‖_t
  double log2_slope = 0.0;         // fitted decay of successive differences against the mesh
};

RefinementReport refinement_sweep(const GridPtr& grid, double t, const std::vector<int>& depths,
                                  const KernelNormParams& p, FieldKind kind = FieldKind::Approximate,
                                  const KernelOptions& opt = {});

// Lattice image sum of flat Gaussians on a torus, tail below 1e-14.
double exact_torus_heat_kernel(const ModelManifold& m, const Point& x, const Point& y, double t);
// Same value from the Fourier series, for cross-checking.
double torus_heat_kernel_fourier(const ModelManifold& m, const Point& x, const Point& y, double t);
PointPairKernel exact_torus_kernel(const ModelManifold& m, const Point& x, const Point& y, double t);

// Scalar heat kernel of the round sphere from its Legendre series.
double sphere_scalar_heat_kernel(double radius, double cos_angle, double t);

// Quadrature floor: field norm of the semigroup defect of the exact scalar heat kernel.
double grid_floor(const GridPtr& grid, double t1, double t2, const KernelNormParams& p, const KernelOptions& opt = {});

// Compose small-time fields to reach T: decomposition lists the slices.
KernelField extend_by_semigroup(const std::vector<KernelField>& pieces);

}  // namespace pathslice
