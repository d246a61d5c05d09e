#pragma once
// MAP estimation: L-BFGS ascent with Armijo backtracking on the unconstrained
// log posterior.

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <vector>

#include "hierform/density/posterior.hpp"
#include "hierform/errors.hpp"

namespace hierform {

struct MapResult {
  Eigen::VectorXd x;
  double lp = 0.0;
  bool converged = false;
  int iterations = 0;
  double grad_inf_norm = 0.0;
};

inline MapResult map_estimate(const LogPosterior& post, Eigen::VectorXd init,
                              double tol = 1e-8, int max_iter = 2000) {
  const int d = post.dim();
  if (init.size() == 0) init = Eigen::VectorXd::Zero(d);
  if (init.size() != d) throw ValidationError("init has wrong dimension");

  MapResult res;
  Eigen::VectorXd x = init, g(d);
  double f = post.value_grad(x, g);
  if (!std::isfinite(f)) throw SamplerError("log posterior is not finite at the start point");
  res.x = x;
  res.lp = f;

  // maximize f by running minimization-form L-BFGS on -f: stored y is the
  // gradient change of -f, so all curvature quantities keep textbook signs
  const int m = 10;
  std::deque<Eigen::VectorXd> S, Y;
  std::deque<double> rho;

  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it;
    res.grad_inf_norm = g.lpNorm<Eigen::Infinity>();
    if (res.grad_inf_norm < tol) {
      res.converged = true;
      break;
    }
    // two-loop recursion on the ascent direction
    Eigen::VectorXd q = g;
    std::vector<double> alpha(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      alpha[static_cast<std::size_t>(i)] =
          rho[static_cast<std::size_t>(i)] * S[static_cast<std::size_t>(i)].dot(q);
      q -= alpha[static_cast<std::size_t>(i)] * Y[static_cast<std::size_t>(i)];
    }
    if (!S.empty()) {
      const double gamma = S.back().dot(Y.back()) / Y.back().squaredNorm();
      q *= gamma;
    }
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double beta = rho[i] * Y[i].dot(q);
      q += (alpha[i] - beta) * S[i];
    }
    Eigen::VectorXd dir = q;
    double slope = g.dot(dir);
    if (!(slope > 0) || !dir.allFinite()) {
      dir = g;
      slope = g.squaredNorm();
      if (!(slope > 0)) break;
    }

    double step = 1.0;
    Eigen::VectorXd x_new(d), g_new(d);
    double f_new = -std::numeric_limits<double>::infinity();
    bool ok = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * dir;
      f_new = post.value_grad(x_new, g_new);
      if (std::isfinite(f_new) && f_new >= f + 1e-4 * step * slope) {
        ok = true;
        break;
      }
      step *= 0.5;
    }
    if (!ok) break;  // no ascent step found; report best so far

    Eigen::VectorXd s = x_new - x, y = g - g_new;
    const double sy = s.dot(y);
    if (std::isfinite(sy) && sy > 1e-12) {
      S.push_back(s);
      Y.push_back(y);
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > m) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    x = x_new;
    f = f_new;
    g = g_new;
    res.x = x;
    res.lp = f;
  }
  res.grad_inf_norm = g.lpNorm<Eigen::Infinity>();
  if (res.grad_inf_norm < tol) res.converged = true;
  return res;
}

}  // namespace hierform
