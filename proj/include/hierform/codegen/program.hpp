#pragma once
// Render a fitted model's math as a Stan-flavored program text: data,
// parameters, transformed parameters, model.  Documentation-grade output —
// deterministic and snapshot-friendly, not guaranteed to compile elsewhere.

#include <string>
#include <vector>

#include "hierform/density/param_space.hpp"
#include "hierform/density/priors.hpp"
#include "hierform/formula/print.hpp"

namespace hierform {

struct ProgramText {
  std::string data, parameters, transformed, model;

  std::string rendered() const {
    std::string s;
    s += "data {\n" + data + "}\n";
    s += "parameters {\n" + parameters + "}\n";
    s += "transformed parameters {\n" + transformed + "}\n";
    s += "model {\n" + model + "}\n";
    return s;
  }
};

namespace detail {

inline std::string prior_call(const PriorDensity& p, const std::string& arg) {
  using K = PriorDensity::Kind;
  const auto f = format_double;
  switch (p.kind) {
    case K::Normal:
      return "normal_lpdf(" + arg + " | " + f(p.loc) + ", " + f(p.scale) + ")";
    case K::StudentT:
      return "student_t_lpdf(" + arg + " | " + f(p.df) + ", " + f(p.loc) + ", " +
             f(p.scale) + ")";
    case K::HalfStudentT:
      return "student_t_lpdf(" + arg + " | " + f(p.df) + ", 0, " + f(p.scale) + ")";
    case K::Lkj:
      return "lkj_corr_cholesky_lpdf(" + arg + " | " + f(p.eta) + ")";
    default:
      return "";
  }
}

// "target += <lpdf>;" with the half-distribution normalization subtracted
inline std::string prior_stmt(const PriorDensity& p, const std::string& arg, int half_mult) {
  const std::string call = prior_call(p, arg);
  if (call.empty()) return "";
  std::string s = "  target += " + call;
  if (p.kind == PriorDensity::HalfStudentT)
    s += " - " + std::to_string(half_mult) + " * student_t_lccdf(0 | " +
         format_double(p.df) + ", 0, " + format_double(p.scale) + ")";
  return s + ";\n";
}

}  // namespace detail

inline std::string emit_program_header(const CheckedSpec& cs) {
  std::string s = "// " + cs.main_text + "\n";
  for (const auto& t : cs.extra_texts) s += "// " + t + "\n";
  const FamilyInfo fam = family_info(cs.family);
  s += "// family: " + fam.name + "\n";
  std::string links = "mu = " + std::string(link_name(fam.mu_link));
  for (std::size_t k = 0; k < fam.extra_dpars.size(); ++k)
    links += "; " + fam.extra_dpars[k] + " = " + link_name(fam.extra_links[k]);
  s += "// links: " + links + "\n";
  return s;
}

inline ProgramText emit_program(const DesignSet& ds, const ParamSpace& ps) {
  const CheckedSpec& cs = ds.spec;
  const FamilyInfo fam = family_info(cs.family);
  const ResolvedPriors rp = resolve_priors(ds, ps);
  const auto& keys = ps.block_keys();
  ProgramText pt;

  auto eta_name = [&](const std::string& owner) {
    return owner == "mu" ? std::string("mu") : "eta_" + owner;
  };
  auto owner_suffix = [&](const std::string& owner) {
    return owner == "mu" ? std::string("") : "_" + owner;
  };
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
    return s;
  };

  // ---- data ----
  std::string& d = pt.data;
  d += "  int<lower=1> n;  // number of observations\n";
  if (fam.integer_response)
    d += "  int<lower=0> y[n];  // response: " + cs.response + "\n";
  else
    d += "  vector[n] y;  // response: " + cs.response + "\n";
  if (!cs.weights_col.empty())
    d += "  vector<lower=0>[n] weights;  // observation weights: " + cs.weights_col + "\n";
  for (const auto& od : ds.owners) {
    const std::string op = owner_suffix(od.name);
    if (od.fixed.X.cols() > 0)
      d += "  matrix[n, " + std::to_string(od.fixed.X.cols()) + "] X" + op +
           ";  // " + od.name + " design: " + join(od.fixed.col_names) + "\n";
    for (const auto& sm : od.smooths) {
      d += "  vector[n] Xs_" + sm.label + ";  // smooth " + sm.label + " null-space basis\n";
      d += "  matrix[n, " + std::to_string(sm.Zs.cols()) + "] Zs_" + sm.label +
           ";  // smooth " + sm.label + " penalized basis\n";
    }
  }
  for (std::size_t bi = 0; bi < ds.rblocks.size(); ++bi) {
    const RandomBlock& rb = ds.rblocks[bi];
    const std::string k = keys[bi];
    d += "  int<lower=1> G_" + k + ";  // grouping levels: " + rb.label + "\n";
    if (rb.spec.grouping.kind == Grouping::MultiMember) {
      const std::size_t M = rb.spec.grouping.members.size();
      for (std::size_t m = 1; m <= M; ++m) {
        d += "  int<lower=1, upper=G_" + k + "> J_" + k + "_" + std::to_string(m) +
             "[n];  // member " + std::to_string(m) + " level index\n";
        d += "  vector[n] W_" + k + "_" + std::to_string(m) + ";  // member " +
             std::to_string(m) + " weight\n";
      }
    } else {
      d += "  int<lower=1, upper=G_" + k + "> J_" + k + "[n];  // level index\n";
    }
    for (int c = 0; c < rb.q; ++c)
      d += "  vector[n] Z_" + k + "_" + std::to_string(c + 1) + ";  // values of " +
           rb.coef_names[static_cast<std::size_t>(c)] + "\n";
  }
  for (const auto& cov : cs.nl_covariates)
    d += "  vector[n] C_" + cov + ";  // non-linear covariate " + cov + "\n";

  // ---- parameters ----
  std::string& p = pt.parameters;
  for (const auto& seg : ps.segments()) {
    switch (seg.kind) {
      case Segment::Coef:
        p += "  vector[" + std::to_string(seg.size) + "] " + seg.name +
             ";  // population coefficients\n";
        break;
      case Segment::SmoothFixed:
        p += "  real " + seg.name + ";  // smooth null-space coefficient\n";
        break;
      case Segment::SmoothZ:
        p += "  vector[" + std::to_string(seg.size) + "] " + seg.name +
             ";  // standardized spline coefficients\n";
        break;
      case Segment::SmoothLogSd:
        p += "  real<lower=0> " + seg.name + ";  // smooth standard deviation\n";
        break;
      case Segment::RanZ: {
        const RandomBlock& rb = ds.rblocks[static_cast<std::size_t>(seg.block_idx)];
        p += "  matrix[G_" + keys[static_cast<std::size_t>(seg.block_idx)] + ", " +
             std::to_string(rb.q) + "] " + seg.name + ";  // standardized group effects\n";
        break;
      }
      case Segment::RanLogSd: {
        const RandomBlock& rb = ds.rblocks[static_cast<std::size_t>(seg.block_idx)];
        p += "  vector<lower=0>[" + std::to_string(rb.q) + "] " + seg.name +
             ";  // group sds: " + join(rb.coef_names) + "\n";
        break;
      }
      case Segment::RanCor: {
        const RandomBlock& rb = ds.rblocks[static_cast<std::size_t>(seg.block_idx)];
        p += "  cholesky_factor_corr[" + std::to_string(rb.q) + "] " + seg.name +
             ";  // group effect correlations\n";
        break;
      }
      case Segment::FamLogSigma:
        p += "  real<lower=0> sigma;  // residual standard deviation\n";
        break;
      case Segment::FamZiLogit:
        p += "  real<lower=0, upper=1> zi;  // zero-inflation probability\n";
        break;
    }
  }

  // ---- transformed parameters ----
  std::string& t = pt.transformed;
  for (const auto& od : ds.owners)
    for (const auto& sm : od.smooths)
      t += "  vector[" + std::to_string(sm.Zs.cols()) + "] s_" + sm.label +
           " = sds_" + sm.label + " * zs_" + sm.label + ";  // actual spline coefficients\n";
  for (std::size_t bi = 0; bi < ds.rblocks.size(); ++bi) {
    const RandomBlock& rb = ds.rblocks[bi];
    const std::string k = keys[bi];
    const std::string dims = "matrix[G_" + k + ", " + std::to_string(rb.q) + "]";
    if (rb.correlated && rb.q >= 2)
      t += "  " + dims + " r_" + k + " = (diag_pre_multiply(sd_" + k + ", L_" + k +
           ") * z_" + k + "')';  // actual group effects\n";
    else
      t += "  " + dims + " r_" + k + " = z_" + k + " * diag_matrix(sd_" + k +
           ");  // actual group effects\n";
  }

  // ---- model ----
  std::string& m = pt.model;
  for (const auto& od : ds.owners) {
    const std::string en = eta_name(od.name);
    const std::string op = owner_suffix(od.name);
    if (od.fixed.X.cols() > 0)
      m += "  vector[n] " + en + " = X" + op + " * b" + op + ";\n";
    else
      m += "  vector[n] " + en + " = rep_vector(0, n);\n";
    for (const auto& sm : od.smooths)
      m += "  " + en + " += bs_" + sm.label + " * Xs_" + sm.label + " + Zs_" +
           sm.label + " * s_" + sm.label + ";\n";
  }
  if (cs.nonlinear) m += "  vector[n] mu;\n";

  if (!ds.rblocks.empty()) {
    m += "  for (i in 1:n) {\n";
    for (std::size_t bi = 0; bi < ds.rblocks.size(); ++bi) {
      const RandomBlock& rb = ds.rblocks[bi];
      const std::string k = keys[bi];
      for (int c = 0; c < rb.q; ++c) {
        const std::string en = eta_name(rb.coef_owners[static_cast<std::size_t>(c)]);
        const std::string zc = "Z_" + k + "_" + std::to_string(c + 1) + "[i]";
        if (rb.spec.grouping.kind == Grouping::MultiMember) {
          std::string line = "    " + en + "[i] +=";
          for (std::size_t mm = 1; mm <= rb.spec.grouping.members.size(); ++mm) {
            if (mm > 1) line += "\n      +";
            line += " W_" + k + "_" + std::to_string(mm) + "[i] * " + zc + " * r_" + k +
                    "[J_" + k + "_" + std::to_string(mm) + "[i], " + std::to_string(c + 1) + "]";
          }
          m += line + ";\n";
        } else {
          m += "    " + en + "[i] += " + zc + " * r_" + k + "[J_" + k + "[i], " +
               std::to_string(c + 1) + "];\n";
        }
      }
    }
    m += "  }\n";
  }

  if (cs.nonlinear) {
    m += "  for (i in 1:n) {\n";
    for (const auto& par : cs.nl_params)
      m += "    real " + par + " = eta_" + par + "[i];\n";
    for (const auto& cov : cs.nl_covariates)
      m += "    real " + cov + " = C_" + cov + "[i];\n";
    m += "    mu[i] = " + nl_expr_to_text(cs.nl_expr) + ";\n";
    m += "  }\n";
  }

  m += "  // priors\n";
  for (std::size_t oi = 0; oi < ds.owners.size(); ++oi) {
    const OwnerDesign& od = ds.owners[oi];
    const std::string op = owner_suffix(od.name);
    for (std::size_t c = 0; c < od.fixed.col_names.size(); ++c)
      m += detail::prior_stmt(rp.coef[oi][c], "b" + op + "[" + std::to_string(c + 1) + "]", 1);
    for (std::size_t si = 0; si < od.smooths.size(); ++si) {
      const std::string lab = od.smooths[si].label;
      m += detail::prior_stmt(rp.smooth_bs[oi][si], "bs_" + lab, 1);
      m += "  target += std_normal_lpdf(zs_" + lab + ");\n";
      m += detail::prior_stmt(rp.smooth_sds[oi][si], "sds_" + lab, 1);
    }
  }
  for (std::size_t bi = 0; bi < ds.rblocks.size(); ++bi) {
    const RandomBlock& rb = ds.rblocks[bi];
    const std::string k = keys[bi];
    m += "  target += std_normal_lpdf(to_vector(z_" + k + "));\n";
    bool same = true;
    for (int c = 1; c < rb.q; ++c)
      if (rp.block_sd[bi][static_cast<std::size_t>(c)].kind != rp.block_sd[bi][0].kind ||
          rp.block_sd[bi][static_cast<std::size_t>(c)].df != rp.block_sd[bi][0].df ||
          rp.block_sd[bi][static_cast<std::size_t>(c)].loc != rp.block_sd[bi][0].loc ||
          rp.block_sd[bi][static_cast<std::size_t>(c)].scale != rp.block_sd[bi][0].scale)
        same = false;
    if (same)
      m += detail::prior_stmt(rp.block_sd[bi][0], "sd_" + k, rb.q);
    else
      for (int c = 0; c < rb.q; ++c)
        m += detail::prior_stmt(rp.block_sd[bi][static_cast<std::size_t>(c)],
                                "sd_" + k + "[" + std::to_string(c + 1) + "]", 1);
    if (rb.correlated && rb.q >= 2)
      m += "  target += lkj_corr_cholesky_lpdf(L_" + k + " | " +
           format_double(rp.block_lkj_eta[bi]) + ");\n";
  }
  for (const auto& dp : cs.constant_dpars) {
    if (dp == "sigma")
      m += detail::prior_stmt(rp.sigma, "sigma", 1);
    else if (dp == "zi")
      m += "  // zi ~ uniform(0, 1)\n";
  }

  m += "  // likelihood\n";
  const bool w = !cs.weights_col.empty();
  auto sigma_at = [&](const std::string& idx) -> std::string {
    for (const auto& od : ds.owners)
      if (od.name == "sigma") return "exp(eta_sigma[" + idx + "])";
    return "sigma";
  };
  auto zi_eta_at = [&](int yval, const std::string& idx) -> std::string {
    for (const auto& od : ds.owners)
      if (od.name == "zi")
        return "bernoulli_logit_lpmf(" + std::to_string(yval) + " | eta_zi[" + idx + "])";
    return "bernoulli_lpmf(" + std::to_string(yval) + " | zi)";
  };
  const bool sigma_modeled = [&] {
    for (const auto& od : ds.owners)
      if (od.name == "sigma") return true;
    return false;
  }();

  switch (cs.family) {
    case FamilyId::Gaussian:
      if (!w && !sigma_modeled) {
        m += "  target += normal_lpdf(y | mu, sigma);\n";
      } else {
        m += "  for (i in 1:n)\n";
        m += std::string("    target += ") + (w ? "weights[i] * " : "") +
             "normal_lpdf(y[i] | mu[i], " + sigma_at("i") + ");\n";
      }
      break;
    case FamilyId::Poisson:
      if (!w) {
        m += "  target += poisson_log_lpmf(y | mu);\n";
      } else {
        m += "  for (i in 1:n)\n";
        m += "    target += weights[i] * poisson_log_lpmf(y[i] | mu[i]);\n";
      }
      break;
    case FamilyId::ZeroInflatedPoisson: {
      const std::string wpre = w ? "weights[i] * " : "";
      m += "  for (i in 1:n) {\n";
      m += "    if (y[i] == 0)\n";
      m += "      target += " + wpre + "log_sum_exp(" + zi_eta_at(1, "i") + ",\n";
      m += "        " + zi_eta_at(0, "i") + " + poisson_log_lpmf(0 | mu[i]));\n";
      m += "    else\n";
      m += "      target += " + wpre + "(" + zi_eta_at(0, "i") +
           " + poisson_log_lpmf(y[i] | mu[i]));\n";
      m += "  }\n";
      break;
    }
  }

  return pt;
}

inline std::string emit_program_text(const DesignSet& ds, const ParamSpace& ps) {
  return emit_program_header(ds.spec) + emit_program(ds, ps).rendered();
}

}  // namespace hierform
