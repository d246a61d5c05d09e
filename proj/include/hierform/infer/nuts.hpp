#pragma once
// No-U-Turn sampler (recursive doubling with slice acceptance), dual-averaging
// step size adaptation to a target acceptance rate, and a diagonal mass matrix
// estimated during warmup.  Chains are independent and deterministic given
// (seed, chain index); with --cores > 1 they run on separate threads and are
// merged by chain index, so the result does not depend on scheduling.

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hierform/density/posterior.hpp"
#include "hierform/errors.hpp"
#include "hierform/infer/config.hpp"
#include "hierform/infer/draws.hpp"
#include "hierform/math/rng.hpp"

namespace hierform {

namespace detail {

struct Hmc {
  const LogPosterior* post;
  Eigen::VectorXd inv_metric;  // diagonal of M^{-1}
  double delta_max = 1000.0;

  double joint(double lp, const Eigen::VectorXd& p) const {
    return lp - 0.5 * p.dot(inv_metric.cwiseProduct(p));
  }

  // one leapfrog step; lp/grad are updated in place, returns false when the
  // density is -inf (divergent state)
  bool leapfrog(Eigen::VectorXd& q, Eigen::VectorXd& p, Eigen::VectorXd& grad,
                double& lp, double eps) const {
    p += 0.5 * eps * grad;
    q += eps * inv_metric.cwiseProduct(p);
    lp = post->value_grad(q, grad);
    if (!std::isfinite(lp)) return false;
    p += 0.5 * eps * grad;
    return true;
  }
};

struct TreeState {
  Eigen::VectorXd q_minus, p_minus, grad_minus;
  double lp_minus = 0;
  Eigen::VectorXd q_plus, p_plus, grad_plus;
  double lp_plus = 0;
  Eigen::VectorXd q_prop, grad_prop;
  double lp_prop = 0;
  double n = 0;  // slice-accepted states in the subtree
  bool cont = false;
  bool divergent = false;
  double alpha = 0;  // summed acceptance statistic
  double n_alpha = 0;
};

inline bool no_uturn(const Hmc& hmc, const Eigen::VectorXd& q_minus,
                     const Eigen::VectorXd& p_minus, const Eigen::VectorXd& q_plus,
                     const Eigen::VectorXd& p_plus) {
  const Eigen::VectorXd dq = q_plus - q_minus;
  return dq.dot(hmc.inv_metric.cwiseProduct(p_minus)) >= 0 &&
         dq.dot(hmc.inv_metric.cwiseProduct(p_plus)) >= 0;
}

inline void build_tree(const Hmc& hmc, Rng& rng, const Eigen::VectorXd& q,
                       const Eigen::VectorXd& p, const Eigen::VectorXd& grad, double lp,
                       double log_u, int dir, int depth, double eps, double joint0,
                       TreeState& out) {
  if (depth == 0) {
    Eigen::VectorXd q1 = q, p1 = p, g1 = grad;
    double lp1 = lp;
    const bool finite = hmc.leapfrog(q1, p1, g1, lp1, dir * eps);
    const double j1 = finite ? hmc.joint(lp1, p1) : -std::numeric_limits<double>::infinity();
    out.q_minus = q1; out.p_minus = p1; out.grad_minus = g1; out.lp_minus = lp1;
    out.q_plus = q1; out.p_plus = p1; out.grad_plus = g1; out.lp_plus = lp1;
    out.q_prop = q1; out.grad_prop = g1; out.lp_prop = lp1;
    out.n = log_u <= j1 ? 1 : 0;
    out.divergent = !(log_u < hmc.delta_max + j1);
    out.cont = !out.divergent;
    out.alpha = std::min(1.0, std::exp(j1 - joint0));
    if (!std::isfinite(j1)) out.alpha = 0.0;
    out.n_alpha = 1;
    return;
  }
  build_tree(hmc, rng, q, p, grad, lp, log_u, dir, depth - 1, eps, joint0, out);
  if (!out.cont) return;
  TreeState other;
  if (dir == -1) {
    build_tree(hmc, rng, out.q_minus, out.p_minus, out.grad_minus, out.lp_minus, log_u,
               dir, depth - 1, eps, joint0, other);
    out.q_minus = other.q_minus; out.p_minus = other.p_minus;
    out.grad_minus = other.grad_minus; out.lp_minus = other.lp_minus;
  } else {
    build_tree(hmc, rng, out.q_plus, out.p_plus, out.grad_plus, out.lp_plus, log_u, dir,
               depth - 1, eps, joint0, other);
    out.q_plus = other.q_plus; out.p_plus = other.p_plus;
    out.grad_plus = other.grad_plus; out.lp_plus = other.lp_plus;
  }
  // the swap is not gated on the second subtree's stop flag; its counted
  // states are valid slice states even when the subtree stopped early
  if (other.n > 0 && rng.uniform() < other.n / (out.n + other.n)) {
    out.q_prop = other.q_prop;
    out.grad_prop = other.grad_prop;
    out.lp_prop = other.lp_prop;
  }
  out.n += other.n;
  out.alpha += other.alpha;
  out.n_alpha += other.n_alpha;
  out.divergent = out.divergent || other.divergent;
  out.cont = other.cont &&
             no_uturn(hmc, out.q_minus, out.p_minus, out.q_plus, out.p_plus);
}

inline double find_reasonable_epsilon(const Hmc& hmc, Rng& rng, const Eigen::VectorXd& q0,
                                      const Eigen::VectorXd& grad0, double lp0) {
  const int d = static_cast<int>(q0.size());
  double eps = 1.0;
  Eigen::VectorXd p(d);
  for (int i = 0; i < d; ++i) p[i] = rng.normal() / std::sqrt(hmc.inv_metric[i]);
  const double j0 = hmc.joint(lp0, p);
  auto try_step = [&](double e) {
    Eigen::VectorXd q = q0, pp = p, g = grad0;
    double lp = lp0;
    if (!hmc.leapfrog(q, pp, g, lp, e)) return -std::numeric_limits<double>::infinity();
    return hmc.joint(lp, pp);
  };
  double ratio = std::exp(try_step(eps) - j0);
  const double a = ratio > 0.5 ? 1.0 : -1.0;
  for (int it = 0; it < 100; ++it) {
    if (a > 0 && !(ratio > 0.5)) break;
    if (a < 0 && !(ratio < 0.5)) break;
    eps *= a > 0 ? 2.0 : 0.5;
    if (eps > 1e7 || eps < 1e-10) break;
    ratio = std::exp(try_step(eps) - j0);
  }
  return eps;
}

struct DualAvg {
  double mu = 0, log_eps = 0, log_eps_bar = 0, h_bar = 0;
  double gamma = 0.05, t0 = 10, kappa = 0.75;
  int m = 0;

  void init(double eps0) {
    mu = std::log(10.0 * eps0);
    log_eps = std::log(eps0);
    log_eps_bar = std::log(eps0);
    h_bar = 0;
    m = 0;
  }
  void update(double accept_stat, double target) {
    ++m;
    const double eta = 1.0 / (m + t0);
    h_bar = (1 - eta) * h_bar + eta * (target - accept_stat);
    log_eps = mu - std::sqrt(static_cast<double>(m)) / gamma * h_bar;
    const double w = std::pow(m, -kappa);
    log_eps_bar = w * log_eps + (1 - w) * log_eps_bar;
  }
};

struct ChainOut {
  Eigen::MatrixXd draws;  // kept x dim (unconstrained)
  std::vector<unsigned char> divergent, treedepth_hit;
  double step_size = 0;
  Eigen::VectorXd inv_metric;
};

inline ChainOut run_chain(LogPosterior post, const SamplerConfig& cfg, int chain_idx) {
  const int d = post.dim();
  Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(chain_idx)));
  Hmc hmc{&post, Eigen::VectorXd::Ones(d)};

  // random init on the unconstrained scale, retried until finite
  Eigen::VectorXd q(d), grad(d);
  double lp = -std::numeric_limits<double>::infinity();
  bool ok = false;
  for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
    for (int i = 0; i < d; ++i) q[i] = rng.uniform(-cfg.init_range, cfg.init_range);
    lp = post.value_grad(q, grad);
    ok = std::isfinite(lp) && grad.allFinite();
  }
  if (!ok)
    throw SamplerError("chain " + std::to_string(chain_idx + 1) +
                       ": no finite starting point found in 100 attempts");

  DualAvg da;
  double eps = find_reasonable_epsilon(hmc, rng, q, grad, lp);
  da.init(eps);

  const int warmup = cfg.warmup;
  const int metric_begin = warmup / 2;         // start collecting variances
  const int metric_end = (warmup * 9) / 10;    // switch metric, re-adapt eps
  std::vector<Eigen::VectorXd> metric_draws;

  const int n_kept = (cfg.iter - cfg.warmup) / cfg.thin;
  ChainOut out;
  out.draws.resize(n_kept, d);
  out.divergent.assign(static_cast<std::size_t>(n_kept), 0);
  out.treedepth_hit.assign(static_cast<std::size_t>(n_kept), 0);

  int kept = 0;
  for (int it = 0; it < cfg.iter; ++it) {
    const bool warm = it < warmup;
    if (warm) eps = std::exp(da.log_eps);

    Eigen::VectorXd p(d);
    for (int i = 0; i < d; ++i) p[i] = rng.normal() / std::sqrt(hmc.inv_metric[i]);
    const double joint0 = hmc.joint(lp, p);
    const double log_u = joint0 - rng.exponential();

    TreeState t;
    t.q_minus = q; t.p_minus = p; t.grad_minus = grad; t.lp_minus = lp;
    t.q_plus = q; t.p_plus = p; t.grad_plus = grad; t.lp_plus = lp;
    t.q_prop = q; t.grad_prop = grad; t.lp_prop = lp;
    double n = 1;
    bool divergent = false, td_hit = false;
    double alpha_sum = 0, n_alpha = 0;
    int depth = 0;
    bool cont = true;
    while (cont) {
      if (depth >= cfg.max_treedepth) {
        td_hit = true;
        break;
      }
      const int dir = rng.uniform() < 0.5 ? -1 : 1;
      TreeState sub;
      if (dir == -1) {
        build_tree(hmc, rng, t.q_minus, t.p_minus, t.grad_minus, t.lp_minus, log_u, dir,
                   depth, eps, joint0, sub);
        t.q_minus = sub.q_minus; t.p_minus = sub.p_minus;
        t.grad_minus = sub.grad_minus; t.lp_minus = sub.lp_minus;
      } else {
        build_tree(hmc, rng, t.q_plus, t.p_plus, t.grad_plus, t.lp_plus, log_u, dir,
                   depth, eps, joint0, sub);
        t.q_plus = sub.q_plus; t.p_plus = sub.p_plus;
        t.grad_plus = sub.grad_plus; t.lp_plus = sub.lp_plus;
      }
      alpha_sum += sub.alpha;
      n_alpha += sub.n_alpha;
      divergent = divergent || sub.divergent;
      if (sub.cont && sub.n > 0 && rng.uniform() < std::min(1.0, sub.n / n)) {
        t.q_prop = sub.q_prop;
        t.grad_prop = sub.grad_prop;
        t.lp_prop = sub.lp_prop;
      }
      n += sub.n;
      cont = sub.cont && no_uturn(hmc, t.q_minus, t.p_minus, t.q_plus, t.p_plus);
      ++depth;
    }
    q = t.q_prop;
    grad = t.grad_prop;
    lp = t.lp_prop;

    if (warm) {
      da.update(n_alpha > 0 ? alpha_sum / n_alpha : 0.0, cfg.adapt_delta);
      if (it >= metric_begin && it < metric_end) metric_draws.push_back(q);
      if (it + 1 == metric_end && d > 0 && metric_draws.size() >= 10) {
        const double nm = static_cast<double>(metric_draws.size());
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
        for (const auto& v : metric_draws) mean += v;
        mean /= nm;
        Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
        for (const auto& v : metric_draws) var += (v - mean).cwiseAbs2();
        var /= (nm - 1.0);
        // regularize towards unity like a weak prior on the scales
        hmc.inv_metric = var * (nm / (nm + 5.0)) +
                         Eigen::VectorXd::Constant(d, 1e-3 * (5.0 / (nm + 5.0)));
        lp = post.value_grad(q, grad);
        const double eps1 = find_reasonable_epsilon(hmc, rng, q, grad, lp);
        da.init(eps1);
      }
      if (it + 1 == warmup) eps = std::exp(da.log_eps_bar);
    } else {
      const int post_idx = it - warmup;
      if (post_idx % cfg.thin == 0 && kept < n_kept) {
        out.draws.row(kept) = q.transpose();
        out.divergent[static_cast<std::size_t>(kept)] = divergent ? 1 : 0;
        out.treedepth_hit[static_cast<std::size_t>(kept)] = td_hit ? 1 : 0;
        ++kept;
      }
    }
  }
  out.step_size = eps;
  out.inv_metric = hmc.inv_metric;
  return out;
}

}  // namespace detail

// Draws come back on the constrained scale, ready for summaries/CSV.
inline Draws nuts_sample(const LogPosterior& post, const SamplerConfig& cfg) {
  cfg.check();
  const ParamSpace& ps = post.space();
  std::vector<detail::ChainOut> outs(static_cast<std::size_t>(cfg.chains));
  const int workers = std::min(cfg.cores, cfg.chains);
  if (workers <= 1) {
    for (int c = 0; c < cfg.chains; ++c) outs[static_cast<std::size_t>(c)] = detail::run_chain(post, cfg, c);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(cfg.chains));
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w)
      threads.emplace_back([&]() {
        for (;;) {
          const int c = next.fetch_add(1);
          if (c >= cfg.chains) return;
          try {
            outs[static_cast<std::size_t>(c)] = detail::run_chain(post, cfg, c);
          } catch (...) {
            errs[static_cast<std::size_t>(c)] = std::current_exception();
          }
        }
      });
    for (auto& t : threads) t.join();
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
  }

  Draws d;
  d.names = ps.constrained_names();
  for (auto& co : outs) {
    Eigen::MatrixXd cons(co.draws.rows(), ps.n_constrained());
    for (Eigen::Index i = 0; i < co.draws.rows(); ++i)
      cons.row(i) = ps.constrain(co.draws.row(i).transpose()).transpose();
    d.chains.push_back(std::move(cons));
    d.divergent.push_back(std::move(co.divergent));
    d.treedepth_hit.push_back(std::move(co.treedepth_hit));
    d.step_size.push_back(co.step_size);
    d.inv_metric.push_back(std::move(co.inv_metric));
  }
  if (d.n_kept() == 0) throw SamplerError("no post-warmup draws kept");
  return d;
}

}  // namespace hierform
