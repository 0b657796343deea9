#pragma once

#include <random>

#include "pathslice/exterior.hpp"
#include "pathslice/geometry.hpp"

namespace pathslice::testing {

inline FormEndomorphism random_endomorphism(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  FormEndomorphism e(n);
  for (int d = 0; d <= n; ++d) {
    const int s = binomial(n, d);
    Eigen::MatrixXd b(s, s);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) b(i, j) = g(rng);
    e.set_sector(d, b);
  }
  return e;
}

inline Eigen::MatrixXd random_rotation(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

// Algebraic curvature tensor Σ_s (A_jk A_il − A_ik A_jl) from random symmetric A.
inline CurvatureTensor random_curvature(int n, std::mt19937_64& rng, int terms = 2) {
  std::normal_distribution<double> g;
  CurvatureTensor r(n);
  for (int s = 0; s < terms; ++s) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = g(rng);
    a = 0.5 * (a + a.transpose());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) r(i, j, k, l) += a(j, k) * a(i, l) - a(i, k) * a(j, l);
  }
  r.contract();
  return r;
}

}  // namespace pathslice::testing
