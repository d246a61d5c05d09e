#pragma once
// Convergence diagnostics: potential scale reduction on split chains and an
// effective sample size from autocorrelations truncated at the first negative
// pair sum (with the monotone correction), combined across chains.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "hierform/math/stats.hpp"

namespace hierform {

namespace detail {

inline double chain_mean(const Eigen::VectorXd& v) { return v.mean(); }

inline double chain_var(const Eigen::VectorXd& v) {
  const double m = v.mean();
  return (v.array() - m).square().sum() / (v.size() - 1);
}

}  // namespace detail

// R-hat over chains split in halves; NaN when every half is constant, +inf
// when halves are constant but distinct.
inline double split_rhat(const std::vector<Eigen::VectorXd>& chains) {
  std::vector<Eigen::VectorXd> halves;
  for (const auto& c : chains) {
    const Eigen::Index n2 = c.size() / 2;
    if (n2 < 2) continue;
    halves.push_back(c.head(n2));
    halves.push_back(c.tail(n2));
  }
  if (halves.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(halves[0].size());
  const double m = static_cast<double>(halves.size());
  double W = 0;
  std::vector<double> means;
  for (const auto& h : halves) {
    W += detail::chain_var(h);
    means.push_back(detail::chain_mean(h));
  }
  W /= m;
  double grand = 0;
  for (double mu : means) grand += mu;
  grand /= m;
  double B = 0;
  for (double mu : means) B += (mu - grand) * (mu - grand);
  B *= n / (m - 1);
  if (W <= 0)
    return B > 1e-300 ? std::numeric_limits<double>::infinity()
                      : std::numeric_limits<double>::quiet_NaN();
  const double var_plus = (n - 1) / n * W + B / n;
  return std::sqrt(var_plus / W);
}

// effective sample size across chains (used unsplit, as declared)
inline double ess(const std::vector<Eigen::VectorXd>& chains) {
  if (chains.empty() || chains[0].size() < 4)
    return std::numeric_limits<double>::quiet_NaN();
  const int m = static_cast<int>(chains.size());
  const Eigen::Index n = chains[0].size();
  std::vector<double> means(static_cast<std::size_t>(m));
  std::vector<Eigen::VectorXd> centered(static_cast<std::size_t>(m));
  for (int c = 0; c < m; ++c) {
    means[static_cast<std::size_t>(c)] = chains[static_cast<std::size_t>(c)].mean();
    centered[static_cast<std::size_t>(c)] =
        chains[static_cast<std::size_t>(c)].array() - means[static_cast<std::size_t>(c)];
  }
  // autocovariance at lag t, averaged over chains (1/n normalization)
  auto acov = [&](Eigen::Index t) {
    double s = 0;
    for (int c = 0; c < m; ++c) {
      const Eigen::VectorXd& x = centered[static_cast<std::size_t>(c)];
      double a = 0;
      for (Eigen::Index i = 0; i + t < n; ++i) a += x[i] * x[i + t];
      s += a / n;
    }
    return s / m;
  };
  const double a0 = acov(0);
  if (a0 <= 0) return std::numeric_limits<double>::quiet_NaN();
  const double W = a0 * n / static_cast<double>(n - 1);
  double B = 0;
  if (m > 1) {
    double grand = 0;
    for (double mu : means) grand += mu;
    grand /= m;
    for (double mu : means) B += (mu - grand) * (mu - grand);
    B *= static_cast<double>(n) / (m - 1);
  }
  const double var_plus = W * (n - 1) / n + (m > 1 ? B / n : 0.0);
  if (var_plus <= 0) return std::numeric_limits<double>::quiet_NaN();

  // Geyer initial monotone sequence on pair sums of rho_t
  auto rho = [&](Eigen::Index t) { return 1.0 - (W - acov(t)) / var_plus; };
  double tau = 0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t + 1 < n; t += 2) {
    double pair = rho(t) + rho(t + 1);
    if (pair < 0) break;
    if (pair > prev_pair) pair = prev_pair;
    prev_pair = pair;
    tau += 2.0 * pair;
  }
  tau -= 1.0;  // rho_0 = 1 counted once, not twice
  if (tau < 1.0 / std::log10(static_cast<double>(m) * n + 10.0))
    tau = 1.0 / std::log10(static_cast<double>(m) * n + 10.0);
  return static_cast<double>(m) * static_cast<double>(n) / tau;
}

}  // namespace hierform
