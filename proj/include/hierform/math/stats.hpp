#pragma once
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace hierform {

inline double mean_of(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double variance_of(const std::vector<double>& x) {
  // sample variance (n-1 denominator)
  const double m = mean_of(x);
  double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

inline double sd_of(const std::vector<double>& x) { return std::sqrt(variance_of(x)); }

// Linear-interpolation sample quantile (R type 7), the convention used for
// all posterior interval summaries in this project.
inline double quantile_type7(std::vector<double> x, double p) {
  if (x.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(x.begin(), x.end());
  const double h = (static_cast<double>(x.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  if (lo == hi) return x[lo];
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

}  // namespace hierform
