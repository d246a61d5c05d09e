#pragma once
// Joint log-posterior over the unconstrained vector, with forward-mode
// gradients.  Non-finite evaluations collapse to -inf with zero gradient so
// the sampler treats them as divergent leapfrog states.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "hierform/density/families.hpp"
#include "hierform/density/param_space.hpp"
#include "hierform/density/priors.hpp"
#include "hierform/math/dual.hpp"

namespace hierform {

class LogPosterior {
 public:
  LogPosterior(const DesignSet& ds, const ParamSpace& ps)
      : ds_(&ds), ps_(&ps), priors_(resolve_priors(ds, ps)) {
    const auto& owners = ds.owners;
    n_ = static_cast<int>(ds.n);
    eta_off_.resize(owners.size());
    int off = 0;
    for (std::size_t oi = 0; oi < owners.size(); ++oi) {
      eta_off_[oi] = off;
      off += n_;
    }
    u_off_.resize(ds.rblocks.size());
    max_q_ = 0;
    for (std::size_t bi = 0; bi < ds.rblocks.size(); ++bi) {
      const RandomBlock& rb = ds.rblocks[bi];
      u_off_[bi] = off;
      off += static_cast<int>(rb.levels.size()) * rb.q;
      max_q_ = std::max(max_q_, rb.q);
      std::vector<int> owners_of;
      for (const auto& on : rb.coef_owners) {
        int found = -1;
        for (std::size_t oj = 0; oj < owners.size(); ++oj)
          if (owners[oj].name == on) found = static_cast<int>(oj);
        owners_of.push_back(found);
      }
      block_coef_owner_.push_back(std::move(owners_of));
    }
    lbuf_off_ = off;
    par_off_ = lbuf_off_ + max_q_ * max_q_;
    stack_off_ = par_off_ + static_cast<int>(ds.spec.nl_params.size());
    scratch_need_ = stack_off_ + std::max(ds.nl_prog.max_depth, 1);
    cov_row_.assign(ds.spec.nl_covariates.size(), 0.0);
    mu_owner_ = -1;
    sigma_owner_ = -1;
    zi_owner_ = -1;
    for (std::size_t oi = 0; oi < owners.size(); ++oi) {
      if (owners[oi].name == "mu") mu_owner_ = static_cast<int>(oi);
      if (owners[oi].name == "sigma") sigma_owner_ = static_cast<int>(oi);
      if (owners[oi].name == "zi") zi_owner_ = static_cast<int>(oi);
    }
    nl_par_owner_.clear();
    for (const auto& p : ds.spec.nl_params) {
      int found = -1;
      for (std::size_t oj = 0; oj < owners.size(); ++oj)
        if (owners[oj].name == p) found = static_cast<int>(oj);
      nl_par_owner_.push_back(found);
    }
    sigma_seg_ = ps.find_segment(Segment::FamLogSigma, -1, -1, -1);
    zi_seg_ = ps.find_segment(Segment::FamZiLogit, -1, -1, -1);
  }

  int dim() const { return ps_->dim(); }
  const ResolvedPriors& priors() const { return priors_; }
  const ParamSpace& space() const { return *ps_; }
  const DesignSet& design() const { return *ds_; }

  double value(const Eigen::VectorXd& x) const {
    if (ws_d_.size() != static_cast<std::size_t>(scratch_need_))
      ws_d_.assign(static_cast<std::size_t>(scratch_need_), 0.0);
    return eval<double>(x.data(), ws_d_.data());
  }

  // fills grad (zeroed on the -inf sentinel); returns the log density
  double value_grad(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
    const int d = ps_->dim();
    grad.resize(d);
    grad.setZero();
    if (d == 0) return value(x);
    constexpr int W = 8;
    theta_dual_.resize(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) theta_dual_[static_cast<std::size_t>(i)] = Dual<W>(x[i]);
    if (ws_dual_.size() != static_cast<std::size_t>(scratch_need_))
      ws_dual_.assign(static_cast<std::size_t>(scratch_need_), Dual<W>(0.0));
    double val = 0.0;
    for (int start = 0; start < d; start += W) {
      const int m = std::min(W, d - start);
      for (int j = 0; j < m; ++j) theta_dual_[static_cast<std::size_t>(start + j)].d[j] = 1.0;
      const Dual<W> r = eval<Dual<W>>(theta_dual_.data(), ws_dual_.data());
      for (int j = 0; j < m; ++j) theta_dual_[static_cast<std::size_t>(start + j)].d[j] = 0.0;
      if (!std::isfinite(r.v)) {
        grad.setZero();
        return -std::numeric_limits<double>::infinity();
      }
      val = r.v;
      for (int j = 0; j < m; ++j) grad[start + j] = r.d[j];
    }
    if (!grad.allFinite()) {
      grad.setZero();
      return -std::numeric_limits<double>::infinity();
    }
    return val;
  }

 private:
  template <class S>
  S eval(const S* theta, S* ws) const {
    using std::exp;
    using std::log;
    using hierform::exp;
    using hierform::log;
    const DesignSet& ds = *ds_;
    const double neg_inf = -std::numeric_limits<double>::infinity();
    S lp(0.0);

    // linear predictors
    for (std::size_t oi = 0; oi < ds.owners.size(); ++oi) {
      const OwnerDesign& od = ds.owners[oi];
      S* eta = ws + eta_off_[oi];
      for (int i = 0; i < n_; ++i) eta[i] = S(0.0);
      if (const Segment* seg = ps_->find_segment(Segment::Coef, static_cast<int>(oi), -1, -1)) {
        const Eigen::MatrixXd& X = od.fixed.X;
        for (int c = 0; c < seg->size; ++c) {
          const S& b = theta[seg->offset + c];
          const double* col = X.col(c).data();
          for (int i = 0; i < n_; ++i) eta[i] = eta[i] + col[i] * b;
        }
      }
      for (std::size_t si = 0; si < od.smooths.size(); ++si) {
        const SmoothBlock& sm = od.smooths[si];
        const Segment* bseg =
            ps_->find_segment(Segment::SmoothFixed, static_cast<int>(oi), -1, static_cast<int>(si));
        const Segment* zseg =
            ps_->find_segment(Segment::SmoothZ, static_cast<int>(oi), -1, static_cast<int>(si));
        const Segment* sseg =
            ps_->find_segment(Segment::SmoothLogSd, static_cast<int>(oi), -1, static_cast<int>(si));
        for (int c = 0; c < bseg->size; ++c) {
          const S& b = theta[bseg->offset + c];
          const double* col = sm.Xs.col(c).data();
          for (int i = 0; i < n_; ++i) eta[i] = eta[i] + col[i] * b;
        }
        const S sds = exp(theta[sseg->offset]);
        for (int c = 0; c < zseg->size; ++c) {
          const S amp = sds * theta[zseg->offset + c];
          const double* col = sm.Zs.col(c).data();
          for (int i = 0; i < n_; ++i) eta[i] = eta[i] + col[i] * amp;
        }
      }
    }

    // group effects: u = sd .* (L z), added into the owning predictors
    S* Lbuf = ws + lbuf_off_;
    for (std::size_t bi = 0; bi < ds.rblocks.size(); ++bi) {
      const RandomBlock& rb = ds.rblocks[bi];
      const int q = rb.q;
      const int G = static_cast<int>(rb.levels.size());
      const Segment* zseg = ps_->find_segment(Segment::RanZ, -1, static_cast<int>(bi), -1);
      const Segment* sseg = ps_->find_segment(Segment::RanLogSd, -1, static_cast<int>(bi), -1);
      const Segment* yseg = ps_->find_segment(Segment::RanCor, -1, static_cast<int>(bi), -1);
      S* u = ws + u_off_[bi];
      if (yseg) {
        S ljac(0.0);
        fill_cholesky_corr<S>(theta + yseg->offset, q, Lbuf, &ljac);
        lp = lp + ljac + lkj_cholesky_lpdf<S>(Lbuf, q, priors_.block_lkj_eta[bi]);
      }
      for (int c = 0; c < q; ++c) {
        const S sd = exp(theta[sseg->offset + c]);
        lp = lp + prior_logpdf(priors_.block_sd[bi][static_cast<std::size_t>(c)], sd) +
             theta[sseg->offset + c];
        for (int g = 0; g < G; ++g) {
          if (yseg) {
            S acc(0.0);
            for (int t = 0; t <= c; ++t)
              acc = acc + Lbuf[c * q + t] * theta[zseg->offset + g * q + t];
            u[g * q + c] = sd * acc;
          } else {
            u[g * q + c] = sd * theta[zseg->offset + g * q + c];
          }
        }
      }
      for (int i = 0; i < zseg->size; ++i) {
        const S& z = theta[zseg->offset + i];
        lp = lp - S(0.5) * z * z - S(0.5 * kLogTwoPi);
      }
      for (const ZEntry& e : rb.entries) {
        const int oi = block_coef_owner_[bi][static_cast<std::size_t>(e.coef)];
        ws[eta_off_[static_cast<std::size_t>(oi)] + e.row] =
            ws[eta_off_[static_cast<std::size_t>(oi)] + e.row] + e.w * u[e.level * q + e.coef];
      }
    }

    // likelihood on the eta scale
    const bool nl = ds.spec.nonlinear;
    S* par_row = ws + par_off_;
    S* stack = ws + stack_off_;
    double* cov_row = cov_row_.data();
    const int n_cov = static_cast<int>(ds.spec.nl_covariates.size());
    NlEvalStatus st;
    const S* eta_mu = mu_owner_ >= 0 ? ws + eta_off_[static_cast<std::size_t>(mu_owner_)] : nullptr;
    const S* eta_sigma =
        sigma_owner_ >= 0 ? ws + eta_off_[static_cast<std::size_t>(sigma_owner_)] : nullptr;
    const S* eta_zi = zi_owner_ >= 0 ? ws + eta_off_[static_cast<std::size_t>(zi_owner_)] : nullptr;
    const S sigma_const = sigma_seg_ ? theta[sigma_seg_->offset] : S(0.0);
    const S zi_const = zi_seg_ ? theta[zi_seg_->offset] : S(0.0);
    for (int i = 0; i < n_; ++i) {
      S em(0.0);
      if (nl) {
        for (int c = 0; c < n_cov; ++c) cov_row[c] = ds.nl_cov(i, c);
        for (std::size_t p = 0; p < nl_par_owner_.size(); ++p)
          par_row[p] = ws[eta_off_[static_cast<std::size_t>(nl_par_owner_[p])] + i];
        em = ds.nl_prog.eval(cov_row, par_row, stack, st);
        if (!st.ok) return S(neg_inf);
      } else {
        em = eta_mu[i];
      }
      S ll(0.0);
      switch (ds.spec.family) {
        case FamilyId::Gaussian:
          ll = gaussian_eta_lp(ds.y[i], em, eta_sigma ? eta_sigma[i] : sigma_const);
          break;
        case FamilyId::Poisson:
          ll = poisson_eta_lp(ds.y_int[static_cast<std::size_t>(i)], em);
          break;
        case FamilyId::ZeroInflatedPoisson:
          ll = zip_eta_lp(ds.y_int[static_cast<std::size_t>(i)], em,
                          eta_zi ? eta_zi[i] : zi_const);
          break;
      }
      lp = lp + (ds.has_weights ? S(ds.weights[i]) * ll : ll);
    }

    // coefficient and smooth priors
    for (std::size_t oi = 0; oi < ds.owners.size(); ++oi) {
      if (const Segment* seg = ps_->find_segment(Segment::Coef, static_cast<int>(oi), -1, -1))
        for (int c = 0; c < seg->size; ++c)
          lp = lp + prior_logpdf(priors_.coef[oi][static_cast<std::size_t>(c)],
                                 theta[seg->offset + c]);
      for (std::size_t si = 0; si < ds.owners[oi].smooths.size(); ++si) {
        const Segment* bseg =
            ps_->find_segment(Segment::SmoothFixed, static_cast<int>(oi), -1, static_cast<int>(si));
        const Segment* zseg =
            ps_->find_segment(Segment::SmoothZ, static_cast<int>(oi), -1, static_cast<int>(si));
        const Segment* sseg =
            ps_->find_segment(Segment::SmoothLogSd, static_cast<int>(oi), -1, static_cast<int>(si));
        for (int c = 0; c < bseg->size; ++c)
          lp = lp + prior_logpdf(priors_.smooth_bs[oi][si], theta[bseg->offset + c]);
        for (int c = 0; c < zseg->size; ++c) {
          const S& z = theta[zseg->offset + c];
          lp = lp - S(0.5) * z * z - S(0.5 * kLogTwoPi);
        }
        const S sds = exp(theta[sseg->offset]);
        lp = lp + prior_logpdf(priors_.smooth_sds[oi][si], sds) + theta[sseg->offset];
      }
    }

    // family constants (log / logit scale with Jacobians)
    if (sigma_seg_) {
      const S sigma = exp(sigma_const);
      lp = lp + prior_logpdf(priors_.sigma, sigma) + sigma_const;
    }
    if (zi_seg_) {
      const S zi = inv_logit(zi_const);
      lp = lp + prior_logpdf(priors_.zi, zi) - log1p_exp(zi_const) - log1p_exp(-zi_const);
    }

    if (!is_finite(lp)) return S(neg_inf);
    return lp;
  }

  const DesignSet* ds_;
  const ParamSpace* ps_;
  ResolvedPriors priors_;
  int n_ = 0;
  int max_q_ = 0;
  int lbuf_off_ = 0, par_off_ = 0, stack_off_ = 0;
  int scratch_need_ = 0;
  int mu_owner_ = -1, sigma_owner_ = -1, zi_owner_ = -1;
  std::vector<int> eta_off_;
  std::vector<int> u_off_;
  std::vector<std::vector<int>> block_coef_owner_;
  std::vector<int> nl_par_owner_;
  const Segment* sigma_seg_ = nullptr;
  const Segment* zi_seg_ = nullptr;
  mutable std::vector<double> cov_row_;
  mutable std::vector<double> ws_d_;
  mutable std::vector<Dual<8>> ws_dual_;
  mutable std::vector<Dual<8>> theta_dual_;
};

}  // namespace hierform
