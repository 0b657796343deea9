#pragma once

#include <vector>

namespace pathslice {

// Least-squares slope of log(y) against log(x); NaN when fewer than two positive points.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Value at t = 0 of the polynomial in t through (t_i, v_i).
double richardson_limit(const std::vector<double>& t, const std::vector<double>& v);

// Neumaier compensated sum with a fixed accumulation order.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace pathslice
