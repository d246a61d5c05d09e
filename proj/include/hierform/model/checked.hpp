#pragma once
// Validation of a model spec against a dataset.  Produces a CheckedSpec: the
// immutable description from which designs, samplers and generated programs
// are built.  All user-facing "does this model make sense on this data"
// errors live here.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hierform/model/blocks.hpp"
#include "hierform/model/spec.hpp"
#include "hierform/tabular/dataset.hpp"

namespace hierform {

struct OwnerSpec {
  enum Kind { Mu, Dpar, Nlpar };
  std::string name;
  Kind kind = Mu;
  Link link = Link::Identity;
  TermList terms;
  std::string formula_text;
};

struct SmoothSpec {
  std::string owner;
  std::string var;
  int k = 10;
  std::string label;  // e.g. "sdev_1"
};

struct CheckedSpec {
  FamilyId family = FamilyId::Gaussian;
  bool nonlinear = false;
  std::string response;
  std::string weights_col;  // "" if none

  std::vector<OwnerSpec> owners;  // linear predictors: mu (unless nonlinear), dpars, nlpars
  NlExpr nl_expr;
  std::vector<std::string> nl_covariates;  // appearance order
  std::vector<std::string> nl_params;      // appearance order
  Link mu_link = Link::Identity;

  std::vector<GroupBlockSpec> blocks;
  std::vector<SmoothSpec> smooths;  // flattened, owner-major
  std::vector<std::string> constant_dpars;  // family params without formulas

  std::vector<PriorSpec> priors;
  std::map<std::string, std::vector<std::string>> factor_levels;  // per used grouping/factor col
  std::vector<std::string> warnings;

  std::string main_text;
  std::vector<std::string> extra_texts;

  const OwnerSpec* find_owner(const std::string& name) const {
    for (const auto& o : owners)
      if (o.name == name) return &o;
    return nullptr;
  }
};

namespace detail {

inline std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), curr(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    curr[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, sub});
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

inline std::string suggest_column(const Dataset& d, const std::string& name) {
  std::string best;
  std::size_t best_dist = 4;  // suggest only close matches
  for (const auto& n : d.names()) {
    const std::size_t dist = levenshtein(name, n);
    if (dist < best_dist) {
      best_dist = dist;
      best = n;
    }
  }
  return best;
}

[[noreturn]] inline void unknown_column(const Dataset& d, const std::string& name,
                                        const std::string& where) {
  std::string msg = "unknown column '" + name + "' " + where;
  const std::string hint = suggest_column(d, name);
  if (!hint.empty()) msg += " (did you mean '" + hint + "'?)";
  throw ValidationError(msg);
}

}  // namespace detail

inline CheckedSpec validate(const ModelSpec& spec, const Dataset& data) {
  CheckedSpec cs;
  cs.family = spec.family;
  cs.nonlinear = spec.nonlinear;
  cs.priors = spec.priors;
  cs.main_text = spec.main.raw_text;
  for (const auto& e : spec.extras) cs.extra_texts.push_back(e.ast.raw_text);
  const FamilyInfo fam = family_info(spec.family);
  cs.mu_link = fam.mu_link;

  if (data.n_rows() == 0) throw ValidationError("dataset has no rows");

  // --- response and addition terms ---------------------------------------
  cs.response = spec.main.response.variables.at(0);
  if (!data.has(cs.response)) detail::unknown_column(data, cs.response, "as response");
  const Column& ycol = data.col(cs.response);
  if (fam.integer_response) {
    if (ycol.kind != ColKind::Integer)
      throw ValidationError("family " + fam.name + " needs an integer response; '" +
                            cs.response + "' is " + col_kind_name(ycol.kind));
    for (std::size_t i = 0; i < ycol.ints.size(); ++i)
      if (ycol.ints[i] < 0)
        throw ValidationError("family " + fam.name + " needs non-negative counts; '" +
                              cs.response + "' is negative at row " + std::to_string(i + 1));
  } else {
    if (ycol.kind == ColKind::Factor)
      throw ValidationError("family " + fam.name + " needs a numeric response; '" +
                            cs.response + "' is a factor");
  }

  for (const auto& at : spec.main.response.aterms) {
    if (at.fun == "weights") {
      if (!cs.weights_col.empty())
        throw ValidationError("only one weights(...) term is allowed");
      if (at.args.size() != 1)
        throw ValidationError("weights(...) takes exactly one column");
      const std::string& w = at.args[0];
      if (!data.has(w)) detail::unknown_column(data, w, "in weights(...)");
      const Column& wc = data.col(w);
      if (wc.kind == ColKind::Factor)
        throw ValidationError("weights column '" + w + "' must be numeric");
      for (std::size_t i = 0; i < wc.size(); ++i)
        if (wc.as_double(i) < 0)
          throw ValidationError("negative weight at row " + std::to_string(i + 1));
      cs.weights_col = w;
    } else {
      throw ValidationError("addition term '" + at.fun +
                            "' is recognized but not supported by this engine");
    }
  }

  // --- helpers ------------------------------------------------------------
  auto note_factor_col = [&](const std::string& name, const std::string& where) {
    if (!data.has(name)) detail::unknown_column(data, name, where);
    const Column& c = data.col(name);
    if (c.kind == ColKind::Numeric)
      throw ValidationError("column '" + name + "' " + where +
                            " is numeric; grouping factors must be factors or integers");
    if (cs.factor_levels.count(name)) return;
    if (c.kind == ColKind::Factor) {
      cs.factor_levels[name] = c.levels;
    } else {  // integer: coerce, first-appearance level order
      std::vector<std::string> lv;
      std::set<long long> seen;
      for (long long v : c.ints)
        if (seen.insert(v).second) lv.push_back(std::to_string(v));
      cs.factor_levels[name] = std::move(lv);
      cs.warnings.push_back("treating integer column '" + name + "' as a grouping factor");
    }
  };

  auto check_plain_var = [&](const std::string& name, const std::string& where) {
    if (!data.has(name)) detail::unknown_column(data, name, where);
    const Column& c = data.col(name);
    if (c.kind == ColKind::Factor && !cs.factor_levels.count(name))
      cs.factor_levels[name] = c.levels;
  };

  std::map<std::string, int> smooth_seen;  // per (owner, var) duplicate counter
  auto check_term_list = [&](const std::string& owner, const TermList& tl,
                             bool is_group_inner) {
    for (const auto& f : tl.fixed)
      for (const auto& v : f.vars) check_plain_var(v, "in formula for " + owner);
    for (const auto& sp : tl.specials) {
      if (is_group_inner)
        throw ValidationError("'" + sp.fun + "(...)' cannot appear inside a group term");
      if (sp.fun != "s")
        throw ValidationError("term '" + sp.fun +
                              "(...)' is recognized but not supported by this engine");
      if (sp.args.size() != 1)
        throw ValidationError("s(...) takes exactly one variable");
      const std::string& v = sp.args[0];
      if (!data.has(v)) detail::unknown_column(data, v, "in s(...)");
      const Column& c = data.col(v);
      if (c.kind == ColKind::Factor)
        throw ValidationError("s(" + v + "): smooths need a numeric variable");
      int k = 10;
      for (const auto& [key, val] : sp.kwargs) {
        if (key == "k") {
          k = std::atoi(val.c_str());
        } else {
          throw ValidationError("unknown argument '" + key + "' to s(...)");
        }
      }
      if (k < 4) throw ValidationError("s(" + v + ", k = " + std::to_string(k) +
                                       "): need k >= 4");
      std::set<double> distinct;
      for (std::size_t i = 0; i < c.size(); ++i) distinct.insert(c.as_double(i));
      if (static_cast<int>(distinct.size()) < k)
        throw ValidationError("s(" + v + "): only " + std::to_string(distinct.size()) +
                              " distinct values, need at least k = " + std::to_string(k));
      SmoothSpec sm;
      sm.owner = owner;
      sm.var = v;
      sm.k = k;
      sm.label = "s" + v + "_" + std::to_string(++smooth_seen[owner + "\x1f" + v]);
      cs.smooths.push_back(std::move(sm));
    }
  };

  // --- owners -------------------------------------------------------------
  auto add_owner = [&](const std::string& name, OwnerSpec::Kind kind, Link link,
                       const TermList& tl, const std::string& text) {
    OwnerSpec os;
    os.name = name;
    os.kind = kind;
    os.link = link;
    os.terms = tl;
    os.formula_text = text;
    check_term_list(name, tl, false);
    for (const auto& gt : tl.groups) check_term_list(name, *gt.inner, true);
    cs.owners.push_back(std::move(os));
  };

  if (!spec.nonlinear) {
    add_owner("mu", OwnerSpec::Mu, fam.mu_link, spec.main.terms, spec.main.raw_text);
  } else {
    cs.nl_expr = spec.main.nl;
  }

  for (const auto& e : spec.extras) {
    if (e.is_dpar) {
      Link link = Link::Identity;
      for (std::size_t i = 0; i < fam.extra_dpars.size(); ++i)
        if (fam.extra_dpars[i] == e.name) link = fam.extra_links[i];
      add_owner(e.name, OwnerSpec::Dpar, link, e.ast.terms, e.ast.raw_text);
    } else {
      add_owner(e.name, OwnerSpec::Nlpar, Link::Identity, e.ast.terms, e.ast.raw_text);
    }
  }

  for (const auto& d : fam.extra_dpars) {
    bool has_formula = false;
    for (const auto& o : cs.owners)
      if (o.kind == OwnerSpec::Dpar && o.name == d) has_formula = true;
    if (!has_formula) cs.constant_dpars.push_back(d);
  }

  // --- non-linear identifier classification -------------------------------
  if (spec.nonlinear) {
    std::vector<std::string> idents;
    collect_nl_idents(spec.main.nl, idents);
    for (const auto& id : idents) {
      bool is_param = false;
      for (const auto& o : cs.owners)
        if (o.kind == OwnerSpec::Nlpar && o.name == id) is_param = true;
      if (is_param) {
        cs.nl_params.push_back(id);
        continue;
      }
      if (!data.has(id))
        detail::unknown_column(data, id,
                               "in the model expression (no parameter formula either)");
      const Column& c = data.col(id);
      if (c.kind == ColKind::Factor)
        throw ValidationError("non-linear covariate '" + id + "' must be numeric");
      cs.nl_covariates.push_back(id);
    }
  }

  // --- variance component blocks ------------------------------------------
  cs.blocks = resolve_blocks(spec);
  for (const auto& b : cs.blocks) {
    if (b.grouping.kind == Grouping::Factors) {
      for (const auto& g : b.grouping.factors)
        note_factor_col(g, "as a grouping factor");
    } else {
      for (const auto& m : b.grouping.members)
        note_factor_col(m, "as a multi-membership member");
      for (const auto& w : b.grouping.weights) {
        if (!data.has(w)) detail::unknown_column(data, w, "as a multi-membership weight");
        const Column& c = data.col(w);
        if (c.kind == ColKind::Factor)
          throw ValidationError("weight column '" + w + "' must be numeric");
        for (std::size_t i = 0; i < c.size(); ++i)
          if (c.as_double(i) < 0)
            throw ValidationError("negative multi-membership weight in '" + w +
                                  "' at row " + std::to_string(i + 1));
      }
      if (!b.grouping.weights.empty()) {
        std::size_t n_off = 0, first_off = 0;
        for (std::size_t i = 0; i < data.n_rows(); ++i) {
          double sum = 0;
          for (const auto& w : b.grouping.weights) sum += data.col(w).as_double(i);
          if (std::abs(sum - 1.0) > 1e-8) {
            if (n_off == 0) first_off = i;
            ++n_off;
          }
        }
        if (n_off > 0)
          cs.warnings.push_back(
              "multi-membership weights do not sum to 1 in " + std::to_string(n_off) +
              " row(s) (first at row " + std::to_string(first_off + 1) +
              "); weights are used as given, without renormalization");
      }
    }
  }

  return cs;
}

}  // namespace hierform
