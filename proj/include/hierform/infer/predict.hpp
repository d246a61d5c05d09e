#pragma once
// Posterior prediction: rebuild per-draw linear predictors from constrained
// draws, for the training data or new data.  Group levels unseen in training
// get a fresh effect drawn from the group distribution per posterior draw
// when groups are included, and are dropped entirely when they are not.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hierform/density/families.hpp"
#include "hierform/density/param_space.hpp"
#include "hierform/infer/draws.hpp"
#include "hierform/math/rng.hpp"

namespace hierform {

class PredictorEngine {
 public:
  PredictorEngine(const DesignSet& ds, const ParamSpace& ps, const Draws& draws)
      : ds_(&ds), ps_(&ps) {
    all_ = draws.stacked_all();
    S_ = static_cast<int>(all_.rows());
    auto need = [&](const std::string& name) {
      const int idx = draws.param_index(name);
      if (idx < 0) throw DataError("draws are missing parameter '" + name + "'");
      return idx;
    };
    const auto& names = ps.constrained_names();
    auto cols_of = [&](const CSeg* cs) {
      std::vector<int> out;
      if (!cs) return out;
      for (int i = 0; i < cs->size; ++i)
        out.push_back(need(names[static_cast<std::size_t>(cs->offset + i)]));
      return out;
    };
    for (std::size_t oi = 0; oi < ds.owners.size(); ++oi) {
      b_cols_.push_back(cols_of(ps.find_cseg(CSeg::B, static_cast<int>(oi), -1, -1)));
      std::vector<std::vector<int>> bs, sc;
      for (std::size_t si = 0; si < ds.owners[oi].smooths.size(); ++si) {
        bs.push_back(cols_of(ps.find_cseg(CSeg::Bs, static_cast<int>(oi), -1,
                                          static_cast<int>(si))));
        sc.push_back(cols_of(ps.find_cseg(CSeg::SCoef, static_cast<int>(oi), -1,
                                          static_cast<int>(si))));
      }
      bs_cols_.push_back(std::move(bs));
      s_cols_.push_back(std::move(sc));
    }
    for (std::size_t bi = 0; bi < ds.rblocks.size(); ++bi) {
      sd_cols_.push_back(cols_of(ps.find_cseg(CSeg::Sd, -1, static_cast<int>(bi), -1)));
      cor_cols_.push_back(cols_of(ps.find_cseg(CSeg::Cor, -1, static_cast<int>(bi), -1)));
      r_cols_.push_back(cols_of(ps.find_cseg(CSeg::R, -1, static_cast<int>(bi), -1)));
    }
    if (const CSeg* cs = ps.find_cseg(CSeg::Sigma, -1, -1, -1))
      sigma_col_ = need(names[static_cast<std::size_t>(cs->offset)]);
    if (const CSeg* cs = ps.find_cseg(CSeg::Zi, -1, -1, -1))
      zi_col_ = need(names[static_cast<std::size_t>(cs->offset)]);
  }

  int n_draws() const { return S_; }

  struct Prepared {
    Eigen::Index n = 0;
    std::vector<Eigen::MatrixXd> X;                    // per owner
    std::vector<std::vector<Eigen::MatrixXd>> Xs, Zs;  // per owner, per smooth
    struct Entry {
      int row = 0, level = 0, coef = 0, unseen = -1;
      double w = 0;
    };
    std::vector<std::vector<Entry>> entries;        // per block
    std::vector<int> n_unseen;                      // per block
    Eigen::MatrixXd nl_cov;
  };

  // training design, reused directly
  Prepared prepare_training() const {
    const DesignSet& ds = *ds_;
    Prepared p;
    p.n = ds.n;
    for (const auto& od : ds.owners) {
      p.X.push_back(od.fixed.X);
      std::vector<Eigen::MatrixXd> xs, zs;
      for (const auto& sm : od.smooths) {
        xs.push_back(sm.Xs);
        zs.push_back(sm.Zs);
      }
      p.Xs.push_back(std::move(xs));
      p.Zs.push_back(std::move(zs));
    }
    for (const auto& rb : ds.rblocks) {
      std::vector<Prepared::Entry> es;
      for (const auto& e : rb.entries) es.push_back({e.row, e.level, e.coef, -1, e.w});
      p.entries.push_back(std::move(es));
      p.n_unseen.push_back(0);
    }
    p.nl_cov = ds.nl_cov;
    return p;
  }

  // new data: conform factor codings to training, allow unseen group levels
  Prepared prepare(const Dataset& nd) const {
    const DesignSet& ds = *ds_;
    const CheckedSpec& cs = ds.spec;
    Dataset nd2 = conform(nd);
    Prepared p;
    p.n = static_cast<Eigen::Index>(nd2.n_rows());
    for (std::size_t oi = 0; oi < ds.owners.size(); ++oi) {
      const OwnerSpec& os = cs.owners[oi];
      p.X.push_back(build_fixed(os.name, os.terms, nd2).X);
      std::vector<Eigen::MatrixXd> xs, zs;
      for (const auto& sm : ds.owners[oi].smooths) {
        Eigen::VectorXd x(p.n);
        for (Eigen::Index i = 0; i < p.n; ++i)
          x[i] = nd2.col(sm.var).as_double(static_cast<std::size_t>(i));
        Eigen::MatrixXd Xs, Zs;
        smooth_newdata(sm, x, Xs, Zs);
        xs.push_back(std::move(Xs));
        zs.push_back(std::move(Zs));
      }
      p.Xs.push_back(std::move(xs));
      p.Zs.push_back(std::move(zs));
    }
    for (std::size_t bi = 0; bi < ds.rblocks.size(); ++bi) {
      const RandomBlock& rb = ds.rblocks[bi];
      std::vector<Prepared::Entry> es;
      std::map<std::string, int> unseen_ids;
      for (const auto& le : labeled_entries(rb.spec, nd2)) {
        Prepared::Entry e{le.row, detail::level_index(rb.levels, le.level), le.coef, -1,
                          le.w};
        if (e.level < 0) {
          auto it = unseen_ids.find(le.level);
          if (it == unseen_ids.end())
            it = unseen_ids.emplace(le.level, static_cast<int>(unseen_ids.size())).first;
          e.unseen = it->second;
        }
        es.push_back(e);
      }
      p.entries.push_back(std::move(es));
      p.n_unseen.push_back(static_cast<int>(unseen_ids.size()));
    }
    if (cs.nonlinear) {
      p.nl_cov.resize(p.n, static_cast<Eigen::Index>(cs.nl_covariates.size()));
      for (std::size_t c = 0; c < cs.nl_covariates.size(); ++c)
        for (Eigen::Index i = 0; i < p.n; ++i)
          p.nl_cov(i, static_cast<Eigen::Index>(c)) =
              nd2.col(cs.nl_covariates[c]).as_double(static_cast<std::size_t>(i));
    }
    return p;
  }

  // per-draw linear predictor of one owner (S x n, eta scale)
  Eigen::MatrixXd owner_eta(std::size_t oi, const Prepared& p, bool include_groups,
                            std::uint64_t unseen_seed) const {
    const DesignSet& ds = *ds_;
    Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(S_, p.n);
    if (!b_cols_[oi].empty()) {
      Eigen::MatrixXd B(S_, static_cast<Eigen::Index>(b_cols_[oi].size()));
      for (std::size_t c = 0; c < b_cols_[oi].size(); ++c)
        B.col(static_cast<Eigen::Index>(c)) = all_.col(b_cols_[oi][c]);
      eta += B * p.X[oi].transpose();
    }
    for (std::size_t si = 0; si < s_cols_[oi].size(); ++si) {
      Eigen::MatrixXd Bs(S_, 1);
      Bs.col(0) = all_.col(bs_cols_[oi][si][0]);
      eta += Bs * p.Xs[oi][si].transpose();
      Eigen::MatrixXd Sc(S_, static_cast<Eigen::Index>(s_cols_[oi][si].size()));
      for (std::size_t c = 0; c < s_cols_[oi][si].size(); ++c)
        Sc.col(static_cast<Eigen::Index>(c)) = all_.col(s_cols_[oi][si][c]);
      eta += Sc * p.Zs[oi][si].transpose();
    }
    if (include_groups) {
      for (std::size_t bi = 0; bi < ds.rblocks.size(); ++bi) {
        const RandomBlock& rb = ds.rblocks[bi];
        const int G = static_cast<int>(rb.levels.size());
        Eigen::MatrixXd fresh;  // S x (q * n_unseen), coef-major per unseen id
        if (p.n_unseen[bi] > 0) fresh = fresh_effects(bi, p.n_unseen[bi], unseen_seed);
        for (const auto& e : p.entries[bi]) {
          if (rb.coef_owners[static_cast<std::size_t>(e.coef)] != ds.owners[oi].name)
            continue;
          if (e.level >= 0) {
            eta.col(e.row) += e.w * all_.col(r_cols_[bi][static_cast<std::size_t>(
                                        e.coef * G + e.level)]);
          } else {
            eta.col(e.row) += e.w * fresh.col(e.unseen * rb.q + e.coef);
          }
        }
      }
    }
    return eta;
  }

  struct DparValues {
    Eigen::MatrixXd mu;     // response scale (lambda for counts)
    Eigen::MatrixXd sigma;  // gaussian only
    Eigen::MatrixXd zi;     // zero-inflated only
  };

  DparValues dpars(const Prepared& p, bool include_groups,
                   std::uint64_t unseen_seed) const {
    const DesignSet& ds = *ds_;
    const CheckedSpec& cs = ds.spec;
    DparValues out;

    Eigen::MatrixXd eta_mu;
    if (cs.nonlinear) {
      std::vector<Eigen::MatrixXd> par_etas;
      std::vector<int> par_owner;
      for (const auto& pn : cs.nl_params) {
        for (std::size_t oi = 0; oi < ds.owners.size(); ++oi)
          if (ds.owners[oi].name == pn) {
            par_etas.push_back(owner_eta(oi, p, include_groups, unseen_seed));
            break;
          }
      }
      eta_mu.resize(S_, p.n);
      std::vector<double> cov(cs.nl_covariates.size());
      std::vector<double> par(cs.nl_params.size());
      std::vector<double> stack(static_cast<std::size_t>(std::max(ds.nl_prog.max_depth, 1)));
      NlEvalStatus st;
      for (Eigen::Index i = 0; i < p.n; ++i) {
        for (std::size_t c = 0; c < cov.size(); ++c)
          cov[c] = p.nl_cov(i, static_cast<Eigen::Index>(c));
        for (int s = 0; s < S_; ++s) {
          for (std::size_t k = 0; k < par.size(); ++k) par[k] = par_etas[k](s, i);
          eta_mu(s, i) = ds.nl_prog.eval(cov.data(), par.data(), stack.data(), st);
          if (!st.ok)
            eta_mu(s, i) = std::numeric_limits<double>::quiet_NaN();
        }
      }
    } else {
      for (std::size_t oi = 0; oi < ds.owners.size(); ++oi)
        if (ds.owners[oi].name == "mu")
          eta_mu = owner_eta(oi, p, include_groups, unseen_seed);
    }
    // response scale for mu (the non-linear predictor also sits on the link
    // scale, consistent with the likelihood)
    out.mu = eta_mu;
    if (cs.mu_link == Link::Log)
      out.mu = eta_mu.array().exp().matrix();
    else if (cs.mu_link == Link::Logit)
      out.mu = ((-eta_mu.array()).exp() + 1.0).inverse().matrix();

    if (cs.family == FamilyId::Gaussian) {
      bool modeled = false;
      for (std::size_t oi = 0; oi < ds.owners.size(); ++oi)
        if (ds.owners[oi].name == "sigma") {
          out.sigma = owner_eta(oi, p, include_groups, unseen_seed).array().exp().matrix();
          modeled = true;
        }
      if (!modeled)
        out.sigma = all_.col(sigma_col_).replicate(1, p.n);
    }
    if (cs.family == FamilyId::ZeroInflatedPoisson) {
      bool modeled = false;
      for (std::size_t oi = 0; oi < ds.owners.size(); ++oi)
        if (ds.owners[oi].name == "zi") {
          Eigen::MatrixXd e = owner_eta(oi, p, include_groups, unseen_seed);
          out.zi = ((-e.array()).exp() + 1.0).inverse().matrix();
          modeled = true;
        }
      if (!modeled)
        out.zi = all_.col(zi_col_).replicate(1, p.n);
    }
    return out;
  }

  // log p(y_i | draw s) on the training data; observation weights scale rows
  Eigen::MatrixXd pointwise_loglik() const {
    const DesignSet& ds = *ds_;
    const Prepared p = prepare_training();
    const DparValues dp = dpars(p, true, 0);
    Eigen::MatrixXd ll(S_, ds.n);
    for (Eigen::Index i = 0; i < ds.n; ++i) {
      const double w = ds.has_weights ? ds.weights[i] : 1.0;
      for (int s = 0; s < S_; ++s) {
        double v = 0;
        switch (ds.spec.family) {
          case FamilyId::Gaussian:
            v = gaussian_log_pdf(ds.y[i], dp.mu(s, i), dp.sigma(s, i));
            break;
          case FamilyId::Poisson:
            v = poisson_log_pmf(ds.y_int[static_cast<std::size_t>(i)], dp.mu(s, i));
            break;
          case FamilyId::ZeroInflatedPoisson:
            v = zip_log_pmf(ds.y_int[static_cast<std::size_t>(i)], dp.mu(s, i),
                            dp.zi(s, i));
            break;
        }
        ll(s, i) = w * v;
      }
    }
    return ll;
  }

  // expected response per draw (E[y | theta_s, row])
  Eigen::MatrixXd expected(const Prepared& p, bool include_groups,
                           std::uint64_t unseen_seed) const {
    const DparValues dp = dpars(p, include_groups, unseen_seed);
    switch (ds_->spec.family) {
      case FamilyId::Gaussian:
      case FamilyId::Poisson:
        return dp.mu;
      case FamilyId::ZeroInflatedPoisson:
        return ((1.0 - dp.zi.array()) * dp.mu.array()).matrix();
    }
    return dp.mu;
  }

  // one sampled response per draw per row
  Eigen::MatrixXd predictive(const Prepared& p, bool include_groups,
                             std::uint64_t seed) const {
    const DparValues dp = dpars(p, include_groups, seed);
    Rng rng(derive_seed(seed, 0x9e3779b97f4a7c15ull));
    Eigen::MatrixXd y(S_, p.n);
    for (int s = 0; s < S_; ++s)
      for (Eigen::Index i = 0; i < p.n; ++i) {
        switch (ds_->spec.family) {
          case FamilyId::Gaussian:
            y(s, i) = dp.mu(s, i) + dp.sigma(s, i) * rng.normal();
            break;
          case FamilyId::Poisson:
            y(s, i) = static_cast<double>(rng.poisson(dp.mu(s, i)));
            break;
          case FamilyId::ZeroInflatedPoisson:
            y(s, i) = rng.bernoulli(dp.zi(s, i))
                          ? 0.0
                          : static_cast<double>(rng.poisson(dp.mu(s, i)));
            break;
        }
      }
    return y;
  }

  // spline-only part of one smooth term (S x n, eta scale, uncentered)
  Eigen::MatrixXd smooth_part(std::size_t oi, std::size_t si, const Prepared& p) const {
    Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(S_, p.n);
    Eigen::MatrixXd Bs(S_, 1);
    Bs.col(0) = all_.col(bs_cols_[oi][si][0]);
    eta += Bs * p.Xs[oi][si].transpose();
    Eigen::MatrixXd Sc(S_, static_cast<Eigen::Index>(s_cols_[oi][si].size()));
    for (std::size_t c = 0; c < s_cols_[oi][si].size(); ++c)
      Sc.col(static_cast<Eigen::Index>(c)) = all_.col(s_cols_[oi][si][c]);
    eta += Sc * p.Zs[oi][si].transpose();
    return eta;
  }

 private:
  // re-encode factor columns used by fixed/smooth/nl terms against training
  // levels; grouping columns keep their own labels
  Dataset conform(const Dataset& nd) const {
    const CheckedSpec& cs = ds_->spec;
    std::set<std::string> grouping_vars;
    for (const auto& b : cs.blocks) {
      if (b.grouping.kind == Grouping::Factors)
        for (const auto& f : b.grouping.factors) grouping_vars.insert(f);
      else {
        for (const auto& m : b.grouping.members) grouping_vars.insert(m);
      }
    }
    Dataset out;
    for (const auto& name : nd.names()) {
      const Column& c = nd.col(name);
      const auto it = cs.factor_levels.find(name);
      if (it != cs.factor_levels.end() && !grouping_vars.count(name)) {
        // fixed-effect factor: labels must be known from training
        std::vector<int> codes(nd.n_rows());
        for (std::size_t i = 0; i < nd.n_rows(); ++i) {
          const std::string lab = c.label(i);
          int code = -1;
          for (std::size_t l = 0; l < it->second.size(); ++l)
            if (it->second[l] == lab) code = static_cast<int>(l);
          if (code < 0)
            throw DataError("level '" + lab + "' of '" + name +
                            "' was not present in the original data");
          codes[i] = code;
        }
        out.add_column(name, Column::factor_with_levels(codes, it->second));
      } else if (grouping_vars.count(name) && c.kind == ColKind::Integer) {
        std::vector<std::string> labs(nd.n_rows());
        for (std::size_t i = 0; i < nd.n_rows(); ++i) labs[i] = c.label(i);
        out.add_column(name, Column::factor(labs));
      } else {
        out.add_column(name, c);
      }
    }
    return out;
  }

  // fresh group effects for unseen levels: coef-major per unseen id, one draw
  // of u ~ N(0, Sigma_s) per posterior draw s
  Eigen::MatrixXd fresh_effects(std::size_t bi, int n_unseen,
                                std::uint64_t seed) const {
    const RandomBlock& rb = ds_->rblocks[bi];
    const int q = rb.q;
    Rng rng(derive_seed(seed, 0xabcd0000ull + bi));
    Eigen::MatrixXd out(S_, n_unseen * q);
    const bool cor = rb.correlated && q >= 2 && !cor_cols_[bi].empty();
    Eigen::MatrixXd R(q, q);
    for (int u = 0; u < n_unseen; ++u)
      for (int s = 0; s < S_; ++s) {
        if (cor) {
          R.setIdentity();
          int k = 0;
          for (int c1 = 0; c1 < q - 1; ++c1)
            for (int c2 = c1 + 1; c2 < q; ++c2) {
              R(c1, c2) = R(c2, c1) = all_(s, cor_cols_[bi][static_cast<std::size_t>(k)]);
              ++k;
            }
          Eigen::LLT<Eigen::MatrixXd> llt(R);
          Eigen::MatrixXd L = llt.matrixL();
          Eigen::VectorXd z(q);
          for (int c = 0; c < q; ++c) z[c] = rng.normal();
          Eigen::VectorXd uv = L * z;
          for (int c = 0; c < q; ++c)
            out(s, u * q + c) =
                all_(s, sd_cols_[bi][static_cast<std::size_t>(c)]) * uv[c];
        } else {
          for (int c = 0; c < q; ++c)
            out(s, u * q + c) =
                all_(s, sd_cols_[bi][static_cast<std::size_t>(c)]) * rng.normal();
        }
      }
    return out;
  }

  const DesignSet* ds_;
  const ParamSpace* ps_;
  Eigen::MatrixXd all_;  // draws x params, chain-major
  int S_ = 0;
  std::vector<std::vector<int>> b_cols_;
  std::vector<std::vector<std::vector<int>>> bs_cols_, s_cols_;
  std::vector<std::vector<int>> sd_cols_, cor_cols_, r_cols_;
  int sigma_col_ = -1, zi_col_ = -1;
};

}  // namespace hierform
