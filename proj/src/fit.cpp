#include "pathslice/fit.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pathslice {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("slope fit needs matching sizes");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  const double den = m * sxx - sx * sx;
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (m * sxy - sx * sy) / den;
}

double richardson_limit(const std::vector<double>& t, const std::vector<double>& v) {
  if (t.size() != v.size() || t.empty()) throw std::invalid_argument("extrapolation needs matching nonempty data");
  // Neville's scheme evaluated at 0
  std::vector<double> p = v;
  const std::size_t m = t.size();
  for (std::size_t k = 1; k < m; ++k)
    for (std::size_t i = 0; i + k < m; ++i)
      p[i] = (t[i + k] * p[i] - t[i] * p[i + 1]) / (t[i + k] - t[i]);
  return p[0];
}

void CompensatedSum::add(double v) {
  const double s = sum_ + v;
  if (std::abs(sum_) >= std::abs(v))
    comp_ += (sum_ - s) + v;
  else
    comp_ += (v - s) + sum_;
  sum_ = s;
}

}  // namespace pathslice
