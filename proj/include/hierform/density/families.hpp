#pragma once
// Per-observation log-likelihood kernels, parameterized on the linear
// predictor scale for numerical stability:
//   gaussian: mu = eta_mu (identity), sigma = exp(eta_sigma)
//   poisson:  lambda = exp(eta_mu)
//   zip:      lambda = exp(eta_mu), zi = logistic(eta_zi)

#include <cmath>

#include "hierform/errors.hpp"
#include "hierform/math/dual.hpp"

namespace hierform {

inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

template <class S>
inline S gaussian_eta_lp(double y, const S& eta_mu, const S& eta_sigma) {
  using std::exp;
  using hierform::exp;
  const S z = (S(y) - eta_mu) * exp(-eta_sigma);
  return S(-0.5 * kLogTwoPi) - eta_sigma - S(0.5) * z * z;
}

template <class S>
inline S poisson_eta_lp(long long y, const S& eta_mu) {
  using std::exp;
  using hierform::exp;
  return S(static_cast<double>(y)) * eta_mu - exp(eta_mu) -
         S(std::lgamma(static_cast<double>(y) + 1.0));
}

// log zi        = eta_zi - log1p_exp(eta_zi)
// log (1 - zi)  =        - log1p_exp(eta_zi)
template <class S>
inline S zip_eta_lp(long long y, const S& eta_mu, const S& eta_zi) {
  using std::exp;
  using hierform::exp;
  const S lam = exp(eta_mu);
  if (y == 0) return log_sum_exp(eta_zi, -lam) - log1p_exp(eta_zi);
  return -log1p_exp(eta_zi) + S(static_cast<double>(y)) * eta_mu - lam -
         S(std::lgamma(static_cast<double>(y) + 1.0));
}

// public constrained-scale pmf (y >= 0, lambda >= 0, zi in [0,1])
inline double zip_log_pmf(long long y, double lambda, double zi) {
  if (y < 0) throw DataError("zip_log_pmf: y must be non-negative");
  if (!(lambda >= 0)) throw DataError("zip_log_pmf: lambda must be non-negative");
  if (!(zi >= 0.0 && zi <= 1.0)) throw DataError("zip_log_pmf: zi must lie in [0, 1]");
  if (y == 0) {
    const double a = std::log(zi);                      // -inf at zi=0, fine
    const double b = std::log1p(-zi) - lambda;          // -inf at zi=1
    return log_sum_exp(a, b);
  }
  if (zi == 1.0 || lambda == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log1p(-zi) + static_cast<double>(y) * std::log(lambda) - lambda -
         std::lgamma(static_cast<double>(y) + 1.0);
}

inline double poisson_log_pmf(long long y, double lambda) {
  if (y < 0) throw DataError("poisson_log_pmf: y must be non-negative");
  if (!(lambda >= 0)) throw DataError("poisson_log_pmf: lambda must be non-negative");
  if (lambda == 0.0) return y == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return static_cast<double>(y) * std::log(lambda) - lambda -
         std::lgamma(static_cast<double>(y) + 1.0);
}

inline double gaussian_log_pdf(double y, double mu, double sigma) {
  const double z = (y - mu) / sigma;
  return -0.5 * kLogTwoPi - std::log(sigma) - 0.5 * z * z;
}

}  // namespace hierform
