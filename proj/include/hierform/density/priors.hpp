#pragma once
// Prior density evaluation and resolution of user prior specs against a
// concrete design.  Defaults: coefficients flat, mu/dpar intercepts
// student_t(3,0,10), all scale parameters half_student_t(3,0,10),
// correlations lkj(1), zero-inflation constant uniform(0,1).

#include <cmath>
#include <string>
#include <vector>

#include "hierform/density/families.hpp"
#include "hierform/density/param_space.hpp"
#include "hierform/math/dual.hpp"
#include "hierform/model/prior.hpp"

namespace hierform {

// log density at x (no truncation handling; half_student_t is the x >= 0
// fold of the t, used only for scale parameters)
template <class S>
inline S prior_logpdf(const PriorDensity& p, const S& x) {
  using std::log;
  using hierform::log;
  switch (p.kind) {
    case PriorDensity::Flat:
    case PriorDensity::UniformProb:
      return S(0.0);
    case PriorDensity::Normal: {
      const S z = (x - S(p.loc)) * (1.0 / p.scale);
      return S(-0.5 * kLogTwoPi - std::log(p.scale)) - S(0.5) * z * z;
    }
    case PriorDensity::StudentT:
    case PriorDensity::HalfStudentT: {
      const double nu = p.df;
      const double c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                       0.5 * std::log(nu * 3.14159265358979323846) - std::log(p.scale);
      const double extra = p.kind == PriorDensity::HalfStudentT ? std::log(2.0) : 0.0;
      const S z = (x - S(p.loc)) * (1.0 / p.scale);
      return S(c + extra) - S(0.5 * (nu + 1.0)) * log(S(1.0) + z * z * (1.0 / nu));
    }
    case PriorDensity::Lkj:
      return S(0.0);  // handled where the factor L is available
  }
  return S(0.0);
}

// lkj density on a cholesky factor L (row-major q x q), up to a constant:
// sum_{j>=2} (q - j + 2 eta - 2) * log L_jj   (1-based j)
template <class S>
inline S lkj_cholesky_lpdf(const S* L, int q, double eta) {
  using std::log;
  using hierform::log;
  S acc(0.0);
  for (int j = 1; j < q; ++j) {
    const double expo = static_cast<double>(q - (j + 1)) + 2.0 * eta - 2.0;
    acc = acc + S(expo) * log(L[j * q + j]);
  }
  return acc;
}

struct ResolvedPriors {
  std::vector<std::vector<PriorDensity>> coef;        // [owner][fixed col]
  std::vector<std::vector<PriorDensity>> smooth_bs;   // [owner][smooth]
  std::vector<std::vector<PriorDensity>> smooth_sds;  // [owner][smooth]
  std::vector<std::vector<PriorDensity>> block_sd;    // [block][coef]
  std::vector<double> block_lkj_eta;                  // [block]
  PriorDensity sigma = PriorDensity::half_student_t(3, 10);
  PriorDensity zi = PriorDensity::uniform_prob();
};

inline ResolvedPriors resolve_priors(const DesignSet& ds, const ParamSpace& ps) {
  ResolvedPriors rp;
  const auto default_scale = PriorDensity::half_student_t(3, 10);
  const auto default_intercept = PriorDensity::student_t(3, 0, 10);

  rp.coef.resize(ds.owners.size());
  rp.smooth_bs.resize(ds.owners.size());
  rp.smooth_sds.resize(ds.owners.size());
  for (std::size_t oi = 0; oi < ds.owners.size(); ++oi) {
    const OwnerDesign& od = ds.owners[oi];
    rp.coef[oi].resize(static_cast<std::size_t>(od.fixed.X.cols()), PriorDensity::flat());
    // mu/dpar intercepts get the weakly-informative default; non-linear
    // parameters are plain coefficients and default to flat
    if (od.kind != OwnerSpec::Nlpar && od.fixed.has_intercept && !rp.coef[oi].empty())
      rp.coef[oi][0] = default_intercept;
    rp.smooth_bs[oi].resize(od.smooths.size(), PriorDensity::flat());
    rp.smooth_sds[oi].resize(od.smooths.size(), default_scale);
  }
  rp.block_sd.resize(ds.rblocks.size());
  rp.block_lkj_eta.assign(ds.rblocks.size(), 1.0);
  for (std::size_t bi = 0; bi < ds.rblocks.size(); ++bi)
    rp.block_sd[bi].assign(static_cast<std::size_t>(ds.rblocks[bi].q), default_scale);

  auto owner_index = [&](std::string name) -> int {
    if (name.empty()) name = "mu";
    for (std::size_t oi = 0; oi < ds.owners.size(); ++oi)
      if (ds.owners[oi].name == name) return static_cast<int>(oi);
    return -1;
  };
  auto block_index = [&](const std::string& group) -> int {
    for (std::size_t bi = 0; bi < ds.rblocks.size(); ++bi)
      if (ps.block_keys()[bi] == group || ds.rblocks[bi].label == group)
        return static_cast<int>(bi);
    return -1;
  };

  // more specific targets win regardless of order: class-wide < intercept <
  // named coefficient, and group-wide sd < per-coefficient sd
  auto pass_rank = [](const PriorSpec& s) -> int {
    switch (s.target.kind) {
      case PriorTarget::CoefClass: return 0;
      case PriorTarget::Intercept: return 1;
      case PriorTarget::Coef: return 2;
      case PriorTarget::Sd: return s.target.coef.empty() ? 0 : 2;
      case PriorTarget::SmoothSd: return s.target.name.empty() ? 0 : 2;
      default: return 1;
    }
  };
  std::vector<const PriorSpec*> ordered;
  for (int rank = 0; rank <= 2; ++rank)
    for (const auto& s : ds.spec.priors)
      if (pass_rank(s) == rank) ordered.push_back(&s);

  for (const PriorSpec* sp : ordered) {
    const PriorSpec& spec = *sp;
    const PriorTarget& t = spec.target;
    const PriorDensity& dens = spec.density;
    if ((t.kind == PriorTarget::Cor) != (dens.kind == PriorDensity::Lkj))
      throw ValidationError("lkj priors apply to correlation targets only (and only lkj "
                            "densities apply there)");
    switch (t.kind) {
      case PriorTarget::Coef: {
        const int oi = owner_index(t.owner);
        if (oi < 0) throw ValidationError("prior target parameter '" + t.owner + "' not found");
        const OwnerDesign& od = ds.owners[static_cast<std::size_t>(oi)];
        bool hit = false;
        for (std::size_t c = 0; c < od.fixed.col_names.size(); ++c)
          if (od.fixed.col_names[c] == t.coef) {
            rp.coef[static_cast<std::size_t>(oi)][c] = dens;
            hit = true;
          }
        for (std::size_t si = 0; si < od.smooths.size(); ++si)
          if (od.smooths[si].label == t.coef) {
            rp.smooth_bs[static_cast<std::size_t>(oi)][si] = dens;
            hit = true;
          }
        if (!hit)
          throw ValidationError("no coefficient '" + t.coef + "' in formula for '" +
                                (t.owner.empty() ? "mu" : t.owner) + "'");
        break;
      }
      case PriorTarget::CoefClass: {
        const int oi = owner_index(t.owner);
        if (oi < 0) throw ValidationError("prior target parameter '" + t.owner + "' not found");
        const OwnerDesign& od = ds.owners[static_cast<std::size_t>(oi)];
        const bool skip_intercept = od.kind != OwnerSpec::Nlpar && od.fixed.has_intercept;
        for (std::size_t c = skip_intercept ? 1 : 0; c < rp.coef[static_cast<std::size_t>(oi)].size(); ++c)
          rp.coef[static_cast<std::size_t>(oi)][c] = dens;
        for (auto& b : rp.smooth_bs[static_cast<std::size_t>(oi)]) b = dens;
        break;
      }
      case PriorTarget::Intercept: {
        const int oi = owner_index(t.owner);
        if (oi < 0) throw ValidationError("prior target parameter '" + t.owner + "' not found");
        const OwnerDesign& od = ds.owners[static_cast<std::size_t>(oi)];
        if (!od.fixed.has_intercept)
          throw ValidationError("formula for '" + od.name + "' has no intercept");
        rp.coef[static_cast<std::size_t>(oi)][0] = dens;
        break;
      }
      case PriorTarget::Sd: {
        const int bi = block_index(t.group);
        if (bi < 0) throw ValidationError("prior group '" + t.group + "' not found");
        const RandomBlock& rb = ds.rblocks[static_cast<std::size_t>(bi)];
        if (t.coef.empty()) {
          for (auto& p : rp.block_sd[static_cast<std::size_t>(bi)]) p = dens;
        } else {
          bool hit = false;
          for (std::size_t c = 0; c < rb.coef_names.size(); ++c)
            if (rb.coef_names[c] == t.coef) {
              rp.block_sd[static_cast<std::size_t>(bi)][c] = dens;
              hit = true;
            }
          if (!hit)
            throw ValidationError("no coefficient '" + t.coef + "' in group '" + t.group + "'");
        }
        break;
      }
      case PriorTarget::Cor: {
        const int bi = block_index(t.group);
        if (bi < 0) throw ValidationError("prior group '" + t.group + "' not found");
        if (!ds.rblocks[static_cast<std::size_t>(bi)].correlated)
          throw ValidationError("group '" + t.group + "' has no correlations (declared with ||)");
        rp.block_lkj_eta[static_cast<std::size_t>(bi)] = dens.eta;
        break;
      }
      case PriorTarget::SmoothSd: {
        bool hit = false;
        for (std::size_t oi = 0; oi < ds.owners.size(); ++oi)
          for (std::size_t si = 0; si < ds.owners[oi].smooths.size(); ++si)
            if (t.name.empty() || ds.owners[oi].smooths[si].label == t.name) {
              rp.smooth_sds[oi][si] = dens;
              hit = true;
            }
        if (!hit) throw ValidationError("no smooth term '" + t.name + "'");
        break;
      }
      case PriorTarget::FamilyPar: {
        bool is_const = false;
        for (const auto& c : ds.spec.constant_dpars)
          if (c == t.name) is_const = true;
        if (!is_const)
          throw ValidationError("'" + t.name +
                                "' is not a constant family parameter of this model");
        if (t.name == "sigma") rp.sigma = dens;
        else rp.zi = dens;
        break;
      }
    }
  }
  return rp;
}

}  // namespace hierform
