#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

namespace pathslice {

using Mask = std::uint32_t;
using cplx = std::complex<double>;

// Index sets I ⊆ {1..n} are bitmasks; bit i-1 stands for index i.
int popcount(Mask m);
bool even_dimension(int n);

// Sign of ψ^a ψ^b relative to the ascending monomial ψ^{a|b}; 0 when a and b overlap.
int reorder_sign(Mask a, Mask b);

// All subsets of {1..n} of size d in ascending mask order.
const std::vector<Mask>& subsets_of_degree(int n, int d);
// Position of a mask inside subsets_of_degree(n, popcount(mask)).
int sector_index(int n, Mask m);
int binomial(int n, int k);

class Multivector {
 public:
  explicit Multivector(int n);
  static Multivector generator(int n, int i);  // ψ^i, 1-based
  static Multivector scalar(int n, double s);

  int dim() const { return n_; }
  double& operator[](Mask m) { return c_[m]; }
  double operator[](Mask m) const { return c_[m]; }
  const std::vector<double>& coefficients() const { return c_; }

  Multivector operator+(const Multivector& o) const;
  Multivector operator-(const Multivector& o) const;
  Multivector operator*(double s) const;

 private:
  int n_;
  std::vector<double> c_;
};

Multivector wedge(const Multivector& a, const Multivector& b);
// Top coefficient ∫ p dψ with ∫ ψ^1…ψ^n dψ = 1.
double berezin(const Multivector& p);

// Polynomial in ψ_x, ρ, ψ_y with generator order ψ_x^1..ψ_x^n, ρ_1..ρ_n, ψ_y^1..ψ_y^n.
// Monomials are 3n-bit masks; the canonical monomial is ascending in that order.
class TripleGrassmann {
 public:
  enum class Block { PsiX = 0, Rho = 1, PsiY = 2 };

  explicit TripleGrassmann(int n);
  static TripleGrassmann scalar(int n, cplx s);
  static TripleGrassmann generator(int n, Block b, int i, cplx coeff = 1.0);
  static TripleGrassmann monomial(int n, Mask psi_x, Mask rho, Mask psi_y, cplx coeff = 1.0);

  int dim() const { return n_; }
  std::size_t size() const { return c_.size(); }
  cplx& operator[](Mask m) { return c_[m]; }
  cplx operator[](Mask m) const { return c_[m]; }

  Mask pack(Mask psi_x, Mask rho, Mask psi_y) const;
  Mask block(Mask m, Block b) const;
  cplx coeff(Mask psi_x, Mask rho, Mask psi_y) const { return c_[pack(psi_x, rho, psi_y)]; }

  TripleGrassmann operator+(const TripleGrassmann& o) const;
  TripleGrassmann operator-(const TripleGrassmann& o) const;
  TripleGrassmann operator*(const TripleGrassmann& o) const;
  TripleGrassmann operator*(cplx s) const;
  TripleGrassmann& operator+=(const TripleGrassmann& o);

  double max_abs() const;

 private:
  int n_;
  std::vector<cplx> c_;
};

// Exact exponential of a nilpotent polynomial; the scalar part is exponentiated separately.
TripleGrassmann exp_nilpotent(const TripleGrassmann& p);

// Berezin integral over one block. The result keeps the remaining blocks in place.
// Orientation: ∫ ψ^1…ψ^n dψ = 1 and ∫ ρ_1…ρ_n dρ = 1. For even n the full block
// monomial commutes with everything, so no Koszul sign arises.
TripleGrassmann berezin(const TripleGrassmann& p, TripleGrassmann::Block b);

class FormEndomorphism {
 public:
  explicit FormEndomorphism(int n);
  FormEndomorphism(int n, Eigen::MatrixXd m);  // throws unless degree-preserving
  static FormEndomorphism identity(int n);

  int dim() const { return n_; }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double operator()(Mask row, Mask col) const { return m_(row, col); }
  void set(Mask row, Mask col, double v);

  // Block of form degree d in subsets_of_degree order.
  Eigen::MatrixXd sector(int d) const;
  void set_sector(int d, const Eigen::MatrixXd& b);

  FormEndomorphism operator*(const FormEndomorphism& o) const;
  FormEndomorphism operator+(const FormEndomorphism& o) const;
  FormEndomorphism operator-(const FormEndomorphism& o) const;
  FormEndomorphism operator*(double s) const;

 private:
  int n_;
  Eigen::MatrixXd m_;
};

// Matrix of the pullback Λ(A) on Λ*: entry (I, J) = det A[I, J].
FormEndomorphism exterior_power(const Eigen::MatrixXd& a);

// f ↦ ∫ L(ψ, ψ_y) f(ψ_y) dψ_y for a polynomial without ρ.
FormEndomorphism kernel_to_endomorphism(const TripleGrassmann& l, double imag_tol = 1e-10);
// Inverse direction: the ψ_x/ψ_y polynomial of an endomorphism.
TripleGrassmann endomorphism_to_kernel(const FormEndomorphism& e);

double supertrace(const FormEndomorphism& e);
// ∫ K(ψ, ψ) dψ evaluated on the kernel polynomial.
double supertrace_berezin(const FormEndomorphism& e);

struct TNormParams {
  TNormParams(double epsilon, double t);
  double epsilon;
  double t;
};

struct DegreeBlock {
  int degree;
  FormEndomorphism block;
  // Coefficients of ψ^J ∂^L, |J| = |L| = degree, ordered by (J, L) in sector order.
  std::vector<double> coefficients;
};

// Operator ψ^J ∂^L with ∂^L ψ^L = 1.
FormEndomorphism normal_monomial(int n, Mask j, Mask l);
std::vector<DegreeBlock> degree_decompose(const FormEndomorphism& e);
double degree_weight(int n, int k, const TNormParams& p);
double t_norm(const FormEndomorphism& e, const TNormParams& p);

// Allocation-free t-norm for repeated use on raw 2^n × 2^n column-major matrices.
class TNormEvaluator {
 public:
  explicit TNormEvaluator(int n);
  double operator()(const double* m, const TNormParams& p) const;
  int dim() const { return n_; }

 private:
  struct Entry {
    int row;
    int col;
    double sign;
  };
  struct Monomial {
    int degree;
    int probe;  // matrix index (J, L) read to get the coefficient
    std::vector<Entry> entries;
  };
  int n_;
  std::vector<Monomial> monomials_;
};

}  // namespace pathslice
