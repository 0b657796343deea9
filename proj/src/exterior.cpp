#include "pathslice/exterior.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pathslice {

int popcount(Mask m) { return std::popcount(m); }

bool even_dimension(int n) { return n > 0 && n % 2 == 0; }

int reorder_sign(Mask a, Mask b) {
  if (a & b) return 0;
  int inversions = 0;
  while (b) {
    int j = std::countr_zero(b);
    inversions += std::popcount(a >> (j + 1));
    b &= b - 1;
  }
  return (inversions & 1) ? -1 : 1;
}

int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<int>(r);
}

namespace {

constexpr int kMaxDim = 6;

struct SubsetTables {
  std::array<std::array<std::vector<Mask>, kMaxDim + 1>, kMaxDim + 1> lists;
  std::array<std::vector<int>, kMaxDim + 1> index;
  SubsetTables() {
    for (int n = 0; n <= kMaxDim; ++n) {
      index[n].assign(std::size_t{1} << n, 0);
      for (Mask m = 0; m < (Mask{1} << n); ++m) {
        auto& l = lists[n][std::popcount(m)];
        index[n][m] = static_cast<int>(l.size());
        l.push_back(m);
      }
    }
  }
};

const SubsetTables& tables() {
  static const SubsetTables t;
  return t;
}

void check_dim(int n) {
  if (n < 1 || n > kMaxDim) throw std::invalid_argument("dimension must lie in 1..6, got " + std::to_string(n));
}

void check_even(int n) {
  check_dim(n);
  if (n % 2) throw std::invalid_argument("odd fiber dimension " + std::to_string(n) + " is unsupported");
}

}  // namespace

const std::vector<Mask>& subsets_of_degree(int n, int d) {
  check_dim(n);
  if (d < 0 || d > n) throw std::out_of_range("degree out of range");
  return tables().lists[n][d];
}

int sector_index(int n, Mask m) {
  check_dim(n);
  return tables().index[n][m];
}

// ---------------------------------------------------------------- Multivector

Multivector::Multivector(int n) : n_(n), c_(std::size_t{1} << n, 0.0) { check_dim(n); }

Multivector Multivector::generator(int n, int i) {
  if (i < 1 || i > n) throw std::out_of_range("generator index");
  Multivector m(n);
  m.c_[Mask{1} << (i - 1)] = 1.0;
  return m;
}

Multivector Multivector::scalar(int n, double s) {
  Multivector m(n);
  m.c_[0] = s;
  return m;
}

Multivector Multivector::operator+(const Multivector& o) const {
  if (o.n_ != n_) throw std::invalid_argument("dimension mismatch");
  Multivector r(*this);
  for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] += o.c_[i];
  return r;
}

Multivector Multivector::operator-(const Multivector& o) const { return *this + o * -1.0; }

Multivector Multivector::operator*(double s) const {
  Multivector r(*this);
  for (auto& v : r.c_) v *= s;
  return r;
}

Multivector wedge(const Multivector& a, const Multivector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch in wedge");
  Multivector r(a.dim());
  const Mask full = (Mask{1} << a.dim());
  for (Mask i = 0; i < full; ++i) {
    if (a[i] == 0.0) continue;
    for (Mask j = 0; j < full; ++j) {
      if (b[j] == 0.0) continue;
      int s = reorder_sign(i, j);
      if (s) r[i | j] += s * a[i] * b[j];
    }
  }
  return r;
}

double berezin(const Multivector& p) { return p[(Mask{1} << p.dim()) - 1]; }

// ----------------------------------------------------------- TripleGrassmann

TripleGrassmann::TripleGrassmann(int n) : n_(n), c_(std::size_t{1} << (3 * n), cplx(0.0)) { check_dim(n); }

TripleGrassmann TripleGrassmann::scalar(int n, cplx s) {
  TripleGrassmann p(n);
  p.c_[0] = s;
  return p;
}

TripleGrassmann TripleGrassmann::generator(int n, Block b, int i, cplx coeff) {
  if (i < 1 || i > n) throw std::out_of_range("generator index");
  TripleGrassmann p(n);
  p.c_[Mask{1} << (static_cast<int>(b) * n + i - 1)] = coeff;
  return p;
}

TripleGrassmann TripleGrassmann::monomial(int n, Mask psi_x, Mask rho, Mask psi_y, cplx coeff) {
  TripleGrassmann p(n);
  p.c_[p.pack(psi_x, rho, psi_y)] = coeff;
  return p;
}

Mask TripleGrassmann::pack(Mask psi_x, Mask rho, Mask psi_y) const {
  return psi_x | (rho << n_) | (psi_y << (2 * n_));
}

Mask TripleGrassmann::block(Mask m, Block b) const {
  return (m >> (static_cast<int>(b) * n_)) & ((Mask{1} << n_) - 1);
}

TripleGrassmann TripleGrassmann::operator+(const TripleGrassmann& o) const {
  TripleGrassmann r(*this);
  r += o;
  return r;
}

TripleGrassmann& TripleGrassmann::operator+=(const TripleGrassmann& o) {
  if (o.n_ != n_) throw std::invalid_argument("dimension mismatch");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

TripleGrassmann TripleGrassmann::operator-(const TripleGrassmann& o) const { return *this + o * cplx(-1.0); }

TripleGrassmann TripleGrassmann::operator*(cplx s) const {
  TripleGrassmann r(*this);
  for (auto& v : r.c_) v *= s;
  return r;
}

TripleGrassmann TripleGrassmann::operator*(const TripleGrassmann& o) const {
  if (o.n_ != n_) throw std::invalid_argument("dimension mismatch");
  std::vector<Mask> lhs, rhs;
  for (Mask m = 0; m < c_.size(); ++m) {
    if (c_[m] != cplx(0.0)) lhs.push_back(m);
    if (o.c_[m] != cplx(0.0)) rhs.push_back(m);
  }
  TripleGrassmann r(n_);
  for (Mask a : lhs)
    for (Mask b : rhs) {
      int s = reorder_sign(a, b);
      if (s) r.c_[a | b] += static_cast<double>(s) * c_[a] * o.c_[b];
    }
  return r;
}

double TripleGrassmann::max_abs() const {
  double m = 0.0;
  for (auto v : c_) m = std::max(m, std::abs(v));
  return m;
}

TripleGrassmann exp_nilpotent(const TripleGrassmann& p) {
  const int n = p.dim();
  TripleGrassmann nil(p);
  const cplx s = nil[0];
  nil[0] = 0.0;
  TripleGrassmann sum = TripleGrassmann::scalar(n, 1.0);
  TripleGrassmann term = sum;
  for (int k = 1; k <= 3 * n; ++k) {
    term = term * nil * cplx(1.0 / k);
    if (term.max_abs() == 0.0) break;
    sum += term;
  }
  return sum * std::exp(s);
}

TripleGrassmann berezin(const TripleGrassmann& p, TripleGrassmann::Block b) {
  const int n = p.dim();
  check_even(n);
  const int shift = static_cast<int>(b) * n;
  const Mask top = ((Mask{1} << n) - 1) << shift;
  TripleGrassmann r(n);
  for (Mask m = 0; m < p.size(); ++m)
    if ((m & top) == top && p[m] != cplx(0.0)) r[m & ~top] += p[m];
  return r;
}

// --------------------------------------------------------- FormEndomorphism

FormEndomorphism::FormEndomorphism(int n) : n_(n), m_(Eigen::MatrixXd::Zero(1 << n, 1 << n)) { check_dim(n); }

FormEndomorphism::FormEndomorphism(int n, Eigen::MatrixXd m) : n_(n), m_(std::move(m)) {
  check_dim(n);
  const int s = 1 << n;
  if (m_.rows() != s || m_.cols() != s) throw std::invalid_argument("endomorphism matrix must be 2^n x 2^n");
  for (int j = 0; j < s; ++j)
    for (int i = 0; i < s; ++i)
      if (m_(i, j) != 0.0 && popcount(i) != popcount(j))
        throw std::invalid_argument("endomorphism is not degree-preserving at entry (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ")");
}

FormEndomorphism FormEndomorphism::identity(int n) {
  return FormEndomorphism(n, Eigen::MatrixXd::Identity(1 << n, 1 << n));
}

void FormEndomorphism::set(Mask row, Mask col, double v) {
  if (v != 0.0 && popcount(row) != popcount(col)) throw std::invalid_argument("entry would break degree preservation");
  m_(row, col) = v;
}

Eigen::MatrixXd FormEndomorphism::sector(int d) const {
  const auto& s = subsets_of_degree(n_, d);
  Eigen::MatrixXd b(s.size(), s.size());
  for (std::size_t a = 0; a < s.size(); ++a)
    for (std::size_t c = 0; c < s.size(); ++c) b(a, c) = m_(s[a], s[c]);
  return b;
}

void FormEndomorphism::set_sector(int d, const Eigen::MatrixXd& b) {
  const auto& s = subsets_of_degree(n_, d);
  for (std::size_t a = 0; a < s.size(); ++a)
    for (std::size_t c = 0; c < s.size(); ++c) m_(s[a], s[c]) = b(a, c);
}

FormEndomorphism FormEndomorphism::operator*(const FormEndomorphism& o) const {
  FormEndomorphism r(n_);
  r.m_.noalias() = m_ * o.m_;
  return r;
}

FormEndomorphism FormEndomorphism::operator+(const FormEndomorphism& o) const {
  FormEndomorphism r(n_);
  r.m_ = m_ + o.m_;
  return r;
}

FormEndomorphism FormEndomorphism::operator-(const FormEndomorphism& o) const {
  FormEndomorphism r(n_);
  r.m_ = m_ - o.m_;
  return r;
}

FormEndomorphism FormEndomorphism::operator*(double s) const {
  FormEndomorphism r(n_);
  r.m_ = m_ * s;
  return r;
}

FormEndomorphism exterior_power(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n) throw std::invalid_argument("exterior_power needs a square matrix");
  FormEndomorphism r(n);
  r.set(0, 0, 1.0);
  for (int d = 1; d <= n; ++d) {
    const auto& s = subsets_of_degree(n, d);
    Eigen::MatrixXd minor(d, d);
    for (Mask i : s)
      for (Mask j : s) {
        int p = 0;
        for (int ri = 0; ri < n; ++ri) {
          if (!(i >> ri & 1)) continue;
          int q = 0;
          for (int cj = 0; cj < n; ++cj)
            if (j >> cj & 1) minor(p, q++) = a(ri, cj);
          ++p;
        }
        r.set(i, j, d == 1 ? minor(0, 0) : minor.determinant());
      }
  }
  return r;
}

FormEndomorphism kernel_to_endomorphism(const TripleGrassmann& l, double imag_tol) {
  const int n = l.dim();
  check_even(n);
  const Mask full = (Mask{1} << n) - 1;
  const double scale = std::max(1.0, l.max_abs());
  FormEndomorphism e(n);
  for (Mask m = 0; m < l.size(); ++m) {
    const cplx c = l[m];
    if (c == cplx(0.0)) continue;
    if (l.block(m, TripleGrassmann::Block::Rho))
      throw std::invalid_argument("kernel still depends on rho; integrate it out first");
    const Mask i = l.block(m, TripleGrassmann::Block::PsiX);
    const Mask k = l.block(m, TripleGrassmann::Block::PsiY);
    if (popcount(i) + popcount(k) != n) {
      if (std::abs(c) > imag_tol * scale) throw std::invalid_argument("kernel is not degree-preserving");
      continue;
    }
    if (std::abs(c.imag()) > imag_tol * scale)
      throw std::runtime_error("kernel has imaginary residue " + std::to_string(std::abs(c.imag())));
    const Mask a = full & ~k;
    e.set(i, a, c.real() * reorder_sign(k, a));
  }
  return e;
}

TripleGrassmann endomorphism_to_kernel(const FormEndomorphism& e) {
  const int n = e.dim();
  check_even(n);
  const Mask full = (Mask{1} << n) - 1;
  TripleGrassmann l(n);
  for (Mask i = 0; i <= full; ++i)
    for (Mask a = 0; a <= full; ++a) {
      const double v = e(i, a);
      if (v == 0.0) continue;
      const Mask k = full & ~a;
      l[l.pack(i, 0, k)] += v * reorder_sign(k, a);
    }
  return l;
}

double supertrace(const FormEndomorphism& e) {
  double s = 0.0;
  for (Mask i = 0; i < (Mask{1} << e.dim()); ++i) s += (popcount(i) & 1 ? -1.0 : 1.0) * e(i, i);
  return s;
}

double supertrace_berezin(const FormEndomorphism& e) {
  const int n = e.dim();
  const TripleGrassmann l = endomorphism_to_kernel(e);
  // Identify ψ_x = ψ_y = ψ, then take the top coefficient.
  Multivector diag(n);
  for (Mask m = 0; m < l.size(); ++m) {
    if (l[m] == cplx(0.0)) continue;
    const Mask i = l.block(m, TripleGrassmann::Block::PsiX);
    const Mask k = l.block(m, TripleGrassmann::Block::PsiY);
    const int s = reorder_sign(i, k);
    if (s) diag[i | k] += s * l[m].real();
  }
  return berezin(diag);
}

// ------------------------------------------------------------------ t-norm

TNormParams::TNormParams(double eps, double time) : epsilon(eps), t(time) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("epsilon must lie in the open interval (0, 1/2)");
  if (!(time > 0.0)) throw std::invalid_argument("t must be positive");
}

FormEndomorphism normal_monomial(int n, Mask j, Mask l) {
  if (popcount(j) != popcount(l)) throw std::invalid_argument("normal monomial needs |J| = |L|");
  FormEndomorphism e(n);
  for (Mask a = 0; a < (Mask{1} << n); ++a) {
    if ((a & l) != l) continue;
    const Mask b = a & ~l;
    const int s1 = reorder_sign(l, b);
    const int s2 = reorder_sign(j, b);
    if (s2) e.set(j | b, a, s1 * s2);
  }
  return e;
}

std::vector<DegreeBlock> degree_decompose(const FormEndomorphism& e) {
  const int n = e.dim();
  Eigen::MatrixXd residual = e.matrix();
  std::vector<DegreeBlock> out;
  for (int k = 0; k <= n; ++k) {
    const auto& s = subsets_of_degree(n, k);
    DegreeBlock blk{k, FormEndomorphism(n), {}};
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(residual.rows(), residual.cols());
    for (Mask j : s)
      for (Mask l : s) {
        const double c = residual(j, l);
        blk.coefficients.push_back(c);
        if (c != 0.0) acc += c * normal_monomial(n, j, l).matrix();
      }
    residual -= acc;
    if (acc.isZero(0.0)) continue;  // only nonzero blocks are reported
    blk.block = FormEndomorphism(n, acc);
    out.push_back(std::move(blk));
  }
  return out;
}

double degree_weight(int n, int k, const TNormParams& p) {
  if (k <= 2) return 1.0;
  return std::pow(p.t, (k - 2) * (-0.5 + p.epsilon / n));
}

double t_norm(const FormEndomorphism& e, const TNormParams& p) {
  double total = 0.0;
  for (const auto& b : degree_decompose(e)) {
    double ss = 0.0;
    for (double c : b.coefficients) ss += c * c;
    total += degree_weight(e.dim(), b.degree, p) * std::sqrt(ss);
  }
  return total;
}

TNormEvaluator::TNormEvaluator(int n) : n_(n) {
  check_dim(n);
  const int s = 1 << n;
  for (int k = 0; k <= n; ++k)
    for (Mask j : subsets_of_degree(n, k))
      for (Mask l : subsets_of_degree(n, k)) {
        Monomial mono{k, static_cast<int>(l) * s + static_cast<int>(j), {}};
        const auto m = normal_monomial(n, j, l).matrix();
        for (int c = 0; c < s; ++c)
          for (int r = 0; r < s; ++r)
            if (m(r, c) != 0.0) mono.entries.push_back({r, c, m(r, c)});
        monomials_.push_back(std::move(mono));
      }
}

double TNormEvaluator::operator()(const double* m, const TNormParams& p) const {
  const int s = 1 << n_;
  std::array<double, 64 * 64> res;
  std::copy(m, m + s * s, res.begin());
  std::array<double, kMaxDim + 1> ss{};
  for (const auto& mono : monomials_) {
    const double c = res[mono.probe];
    if (c == 0.0) continue;
    ss[mono.degree] += c * c;
    for (const auto& e : mono.entries) res[e.col * s + e.row] -= c * e.sign;
  }
  double total = 0.0;
  for (int k = 0; k <= n_; ++k)
    if (ss[k] > 0.0) total += degree_weight(n_, k, p) * std::sqrt(ss[k]);
  return total;
}

}  // namespace pathslice
