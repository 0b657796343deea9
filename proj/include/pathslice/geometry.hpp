#pragma once

#include <Eigen/Dense>

#include <random>
#include <string>
#include <variant>
#include <vector>

namespace pathslice {

using Point = Eigen::VectorXd;   // ambient coordinates, factors concatenated
using Tangent = Eigen::VectorXd; // components in the orthonormal frame at the base point

struct CurvatureTensor {
  explicit CurvatureTensor(int n);

  int n;
  std::vector<double> r;  // R_ijkl = (∂_l, R[∂_i, ∂_j] ∂_k), zero-based, row-major
  Eigen::MatrixXd ricci;  // Ric_ij = Σ_k R_kijk
  double scalar = 0.0;

  double& operator()(int i, int j, int k, int l) { return r[((i * n + j) * n + k) * n + l]; }
  double operator()(int i, int j, int k, int l) const { return r[((i * n + j) * n + k) * n + l]; }

  void contract();  // recompute ricci and scalar from r
  // Components after moving to another frame: R'_abcd = Σ R_ijkl A_ai A_bj A_ck A_dl.
  CurvatureTensor rotated(const Eigen::MatrixXd& a) const;
  // Largest violation of the algebraic symmetries and the first Bianchi identity.
  double symmetry_defect() const;
};

struct TorusFactor {
  std::vector<double> lengths;
};

struct SphereFactor {
  double radius = 1.0;
};

using Factor = std::variant<TorusFactor, SphereFactor>;

class ModelManifold {
 public:
  static ModelManifold torus(std::vector<double> lengths);
  static ModelManifold sphere2(double radius = 1.0);
  static ModelManifold product(const std::vector<ModelManifold>& parts);

  int dim() const { return n_; }
  int ambient_dim() const { return ambient_; }
  const std::vector<Factor>& factors() const { return factors_; }
  std::string name() const;
  bool is_flat() const;
  // Parallel curvature (∇R = 0) holds for every model here.
  bool parallel_curvature() const { return true; }

  int factor_dim(std::size_t f) const;
  int factor_offset(std::size_t f) const { return tan_off_[f]; }
  int factor_ambient_offset(std::size_t f) const { return amb_off_[f]; }
  ModelManifold factor_manifold(std::size_t f) const;

  Point canonical(const Point& p) const;
  Point random_point(std::mt19937_64& rng) const;
  // Ambient components of the frame vectors, one per column (ambient_dim x n).
  Eigen::MatrixXd frame(const Point& p) const;

  double injectivity_radius() const;
  double distance(const Point& x, const Point& y) const;
  Point exp_map(const Point& y, const Tangent& v) const;
  Tangent log_map(const Point& y, const Point& x) const;
  // Matrix T with T_ba = <F_b(to), pt E_a(from)>: transport along the short geodesic.
  Eigen::MatrixXd parallel_transport(const Point& from, const Point& to) const;
  // J_aj = <F_a(exp_y v), d(exp_y)_v e_j>.
  Eigen::MatrixXd dexp_frame(const Point& y, const Tangent& v) const;
  CurvatureTensor curvature(const Point& y) const;
  double volume() const;

 private:
  ModelManifold() = default;
  void finish();

  std::vector<Factor> factors_;
  std::vector<int> tan_off_, amb_off_;
  int n_ = 0;
  int ambient_ = 0;
};

// Exact geodesic flow on the embedded sphere by RK4, for checking the closed forms.
Point rk4_sphere_geodesic(const Point& y, const Eigen::Vector3d& velocity, double time, int steps);

struct RncTermReport {
  std::string term;        // "g", "ginv", "gamma", "pt"
  int stated_order;        // order of the remainder in the expansion
  double coefficient;      // fitted multiple of the predicted leading term
  double slope;            // log-log slope of the remainder against h
  std::vector<double> h;
  std::vector<double> remainder;
};

// Fits the leading RNC coefficients of g, g^{-1}, Γ and pt at y against the curvature
// predictions and measures how the remainder scales with h.
std::vector<RncTermReport> rnc_expansion_check(const ModelManifold& m, const Point& y, double h_fit,
                                               const std::vector<double>& h_sweep);

// Metric, inverse metric, Christoffel symbols and transport in RNC about y at the coordinate v.
struct RncData {
  Eigen::MatrixXd g, ginv, pt;
  std::vector<double> gamma;  // Γ^k_ij at index (k * n + i) * n + j
};
RncData rnc_data(const ModelManifold& m, const Point& y, const Tangent& v, double fd_step);

// d(x,y)^2 - |x_vec - y_vec|^2 in RNC about z.
double distance_defect(const ModelManifold& m, const Point& z, const Tangent& xv, const Tangent& yv);

}  // namespace pathslice
