#pragma once
// Information criteria from pointwise log-likelihood matrices (draws x obs):
// WAIC, and LOO via Pareto-smoothed importance sampling.  The generalized
// Pareto tail fit uses the Zhang-Stephens profile-posterior estimator with a
// weak prior pulling the shape towards 0.5.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hierform/errors.hpp"
#include "hierform/math/stats.hpp"

namespace hierform {

struct IcResult {
  double elpd = 0;        // sum of pointwise elpd
  double ic = 0;          // -2 * elpd (WAIC or LOOIC)
  double se = 0;          // SE of ic
  double p_eff = 0;       // effective parameter count
  Eigen::VectorXd pointwise;  // elpd_i
  std::vector<double> pareto_k;  // LOO only
  int n_high_k = 0;              // k > 0.7
};

namespace detail {

inline double log_sum_exp_col(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

// Zhang-Stephens (2009) fit of GPD(sigma, k) to exceedances x > 0
inline void gpd_fit(std::vector<double> x, double& k_hat, double& sigma_hat) {
  std::sort(x.begin(), x.end());
  const int M = static_cast<int>(x.size());
  const int J = 30 + static_cast<int>(std::floor(std::sqrt(static_cast<double>(M))));
  const double xq = x[static_cast<std::size_t>(
      std::max(0, static_cast<int>(std::floor(M / 4.0 + 0.5)) - 1))];
  const double xmax = x[static_cast<std::size_t>(M - 1)];
  std::vector<double> b(static_cast<std::size_t>(J)), L(static_cast<std::size_t>(J));
  for (int j = 0; j < J; ++j) {
    b[static_cast<std::size_t>(j)] =
        1.0 / xmax + (1.0 - std::sqrt(static_cast<double>(J) / (j + 0.5))) / (3.0 * xq);
  }
  auto k_of = [&](double bj) {
    double s = 0;
    for (double xi : x) s += std::log1p(-bj * xi);
    return s / M;
  };
  double Lmax = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < J; ++j) {
    const double bj = b[static_cast<std::size_t>(j)];
    const double kj = k_of(bj);
    double lj = -std::numeric_limits<double>::infinity();
    if (-bj / kj > 0 && std::isfinite(kj))
      lj = M * (std::log(-bj / kj) - kj - 1.0);
    L[static_cast<std::size_t>(j)] = lj;
    Lmax = std::max(Lmax, lj);
  }
  double wsum = 0, bhat = 0;
  for (int j = 0; j < J; ++j) {
    const double w = std::exp(L[static_cast<std::size_t>(j)] - Lmax);
    wsum += w;
    bhat += w * b[static_cast<std::size_t>(j)];
  }
  bhat /= wsum;
  k_hat = k_of(bhat);
  sigma_hat = -k_hat / bhat;
  // weak prior: pull towards 0.5 with 10 pseudo-observations
  k_hat = (M * k_hat + 5.0) / (M + 10.0);
}

inline double gpd_quantile(double p, double k, double sigma) {
  if (std::fabs(k) < 1e-12) return -sigma * std::log1p(-p);
  return sigma / k * (std::pow(1.0 - p, -k) - 1.0);
}

}  // namespace detail

inline IcResult waic(const Eigen::MatrixXd& ll) {
  const int S = static_cast<int>(ll.rows());
  const Eigen::Index n = ll.cols();
  IcResult r;
  r.pointwise.resize(n);
  double p_eff = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lpd = detail::log_sum_exp_col(ll.col(i)) - std::log(S);
    const double m = ll.col(i).mean();
    const double v = (ll.col(i).array() - m).square().sum() / (S - 1);
    r.pointwise[i] = lpd - v;
    p_eff += v;
  }
  r.elpd = r.pointwise.sum();
  r.p_eff = p_eff;
  r.ic = -2.0 * r.elpd;
  const Eigen::VectorXd pt_ic = -2.0 * r.pointwise;
  const double mean_ic = pt_ic.mean();
  const double varic = (pt_ic.array() - mean_ic).square().sum() / (n - 1);
  r.se = std::sqrt(static_cast<double>(n) * varic);
  return r;
}

inline IcResult psis_loo(const Eigen::MatrixXd& ll) {
  const int S = static_cast<int>(ll.rows());
  const Eigen::Index n = ll.cols();
  IcResult r;
  r.pointwise.resize(n);
  r.pareto_k.assign(static_cast<std::size_t>(n), 0.0);

  const int M = static_cast<int>(
      std::ceil(std::min(0.2 * S, 3.0 * std::sqrt(static_cast<double>(S)))));
  double p_eff = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd lw = -ll.col(i);
    const double lw_max = lw.maxCoeff();
    lw.array() -= lw_max;

    double khat = 0;
    if (M >= 5 && M < S) {
      // smooth the M largest weights with a generalized Pareto fit
      std::vector<int> order(static_cast<std::size_t>(S));
      for (int s = 0; s < S; ++s) order[static_cast<std::size_t>(s)] = s;
      std::sort(order.begin(), order.end(),
                [&](int a, int b) { return lw[a] < lw[b]; });
      const double cutoff = lw[order[static_cast<std::size_t>(S - M - 1)]];
      const double cutoff_w = std::exp(cutoff);
      std::vector<double> exceed;
      for (int t = S - M; t < S; ++t) {
        const double e = std::exp(lw[order[static_cast<std::size_t>(t)]]) - cutoff_w;
        exceed.push_back(std::max(e, 0.0));
      }
      bool all_pos = true;
      for (double e : exceed) all_pos = all_pos && e > 0;
      if (all_pos) {
        double sigma = 0;
        detail::gpd_fit(exceed, khat, sigma);
        if (std::isfinite(khat) && std::isfinite(sigma) && sigma > 0) {
          const double max_raw = lw[order[static_cast<std::size_t>(S - 1)]];
          for (int t = 0; t < M; ++t) {
            const double pq = (t + 0.5) / M;
            double sm = cutoff_w + detail::gpd_quantile(pq, khat, sigma);
            double lsm = std::log(sm);
            if (lsm > max_raw) lsm = max_raw;  // cap at the largest raw weight
            lw[order[static_cast<std::size_t>(S - M + t)]] = lsm;
          }
        }
      }
    }
    r.pareto_k[static_cast<std::size_t>(i)] = khat;
    if (khat > 0.7) ++r.n_high_k;

    const double log_norm = detail::log_sum_exp_col(lw);
    // elpd_loo_i = log( sum_s w_s exp(ll_si) / sum_s w_s )
    Eigen::VectorXd t = lw + ll.col(i);
    r.pointwise[i] = detail::log_sum_exp_col(t) - log_norm;
    const double lpd = detail::log_sum_exp_col(ll.col(i)) - std::log(S);
    p_eff += lpd - r.pointwise[i];
  }
  r.elpd = r.pointwise.sum();
  r.p_eff = p_eff;
  r.ic = -2.0 * r.elpd;
  const Eigen::VectorXd pt_ic = -2.0 * r.pointwise;
  const double mean_ic = pt_ic.mean();
  const double varic = (pt_ic.array() - mean_ic).square().sum() / (n - 1);
  r.se = std::sqrt(static_cast<double>(n) * varic);
  return r;
}

struct IcDiff {
  double diff = 0;  // ic_a - ic_b
  double se = 0;
};

// pairwise difference on the information-criterion scale; antisymmetric
inline IcDiff ic_diff(const IcResult& a, const IcResult& b) {
  if (a.pointwise.size() != b.pointwise.size())
    throw ValidationError("models were fit to different numbers of observations");
  const Eigen::Index n = a.pointwise.size();
  const Eigen::VectorXd d = -2.0 * (a.pointwise - b.pointwise);
  IcDiff out;
  out.diff = d.sum();
  const double m = d.mean();
  const double v = (d.array() - m).square().sum() / (n - 1);
  out.se = std::sqrt(static_cast<double>(n) * v);
  return out;
}

}  // namespace hierform
