#pragma once
// Deterministic JSON rendering of resolved model structure (for the
// `parse --resolve` debug surface, golden tests, and fit bundles), plus
// prior (de)serialization.

#include <nlohmann/json.hpp>

#include "hierform/formula/json.hpp"
#include "hierform/formula/print.hpp"
#include "hierform/model/checked.hpp"

namespace hierform {

inline Json to_json(const PriorTarget& t) {
  Json j;
  switch (t.kind) {
    case PriorTarget::Coef:
      j["kind"] = "coef";
      j["owner"] = t.owner;
      j["coef"] = t.coef;
      break;
    case PriorTarget::CoefClass:
      j["kind"] = "coef_class";
      j["owner"] = t.owner;
      break;
    case PriorTarget::Intercept:
      j["kind"] = "intercept";
      j["owner"] = t.owner;
      break;
    case PriorTarget::Sd:
      j["kind"] = "sd";
      j["group"] = t.group;
      if (!t.coef.empty()) j["coef"] = t.coef;
      break;
    case PriorTarget::Cor:
      j["kind"] = "cor";
      j["group"] = t.group;
      break;
    case PriorTarget::SmoothSd:
      j["kind"] = "sds";
      if (!t.name.empty()) j["smooth"] = t.name;
      break;
    case PriorTarget::FamilyPar:
      j["kind"] = "family_par";
      j["name"] = t.name;
      break;
  }
  return j;
}

inline Json to_json(const PriorDensity& d) {
  Json j;
  switch (d.kind) {
    case PriorDensity::Flat: j["kind"] = "flat"; break;
    case PriorDensity::Normal:
      j["kind"] = "normal";
      j["mu"] = d.loc;
      j["sd"] = d.scale;
      break;
    case PriorDensity::StudentT:
      j["kind"] = "student_t";
      j["df"] = d.df;
      j["mu"] = d.loc;
      j["sd"] = d.scale;
      break;
    case PriorDensity::HalfStudentT:
      j["kind"] = "half_student_t";
      j["df"] = d.df;
      j["sd"] = d.scale;
      break;
    case PriorDensity::Lkj:
      j["kind"] = "lkj";
      j["eta"] = d.eta;
      break;
    case PriorDensity::UniformProb: j["kind"] = "uniform_prob"; break;
  }
  return j;
}

inline Json to_json(const PriorSpec& p) {
  Json j;
  j["density"] = to_json(p.density);
  j["target"] = to_json(p.target);
  return j;
}

inline PriorDensity prior_density_from_json(const Json& j) {
  const std::string kind = j.at("kind");
  if (kind == "flat") return PriorDensity::flat();
  if (kind == "normal") return PriorDensity::normal(j.at("mu"), j.at("sd"));
  if (kind == "student_t") return PriorDensity::student_t(j.at("df"), j.at("mu"), j.at("sd"));
  if (kind == "half_student_t") return PriorDensity::half_student_t(j.at("df"), j.at("sd"));
  if (kind == "lkj") return PriorDensity::lkj(j.at("eta"));
  if (kind == "uniform_prob") return PriorDensity::uniform_prob();
  throw ValidationError("unknown prior density kind '" + kind + "'");
}

inline PriorTarget prior_target_from_json(const Json& j) {
  PriorTarget t;
  const std::string kind = j.at("kind");
  auto get = [&](const char* key) -> std::string {
    return j.contains(key) ? std::string(j.at(key)) : std::string();
  };
  if (kind == "coef") {
    t.kind = PriorTarget::Coef;
    t.owner = get("owner");
    t.coef = get("coef");
  } else if (kind == "coef_class") {
    t.kind = PriorTarget::CoefClass;
    t.owner = get("owner");
  } else if (kind == "intercept") {
    t.kind = PriorTarget::Intercept;
    t.owner = get("owner");
  } else if (kind == "sd") {
    t.kind = PriorTarget::Sd;
    t.group = get("group");
    t.coef = get("coef");
  } else if (kind == "cor") {
    t.kind = PriorTarget::Cor;
    t.group = get("group");
  } else if (kind == "sds") {
    t.kind = PriorTarget::SmoothSd;
    t.name = get("smooth");
  } else if (kind == "family_par") {
    t.kind = PriorTarget::FamilyPar;
    t.name = get("name");
  } else {
    throw ValidationError("unknown prior target kind '" + kind + "'");
  }
  return t;
}

inline PriorSpec prior_from_json(const Json& j) {
  PriorSpec p;
  p.density = prior_density_from_json(j.at("density"));
  p.target = prior_target_from_json(j.at("target"));
  return p;
}

inline Json to_json(const Grouping& g) {
  Json j;
  if (g.kind == Grouping::Factors) {
    j["kind"] = "factors";
    j["factors"] = g.factors;
  } else {
    j["kind"] = "multi_membership";
    j["members"] = g.members;
    j["weights"] = g.weights;
  }
  return j;
}

inline Json to_json(const GroupBlockSpec& b) {
  Json j;
  j["label"] = b.grouping.label();
  j["grouping"] = to_json(b.grouping);
  j["terms"] = Json::array();
  for (const auto& t : b.terms) {
    Json tj;
    tj["owner"] = t.owner;
    tj["inner"] = t.inner_text;
    j["terms"].push_back(tj);
  }
  j["correlated"] = b.correlated;
  j["id"] = b.id;
  return j;
}

inline Json to_json(const CheckedSpec& cs) {
  Json j;
  j["family"] = family_info(cs.family).name;
  j["nonlinear"] = cs.nonlinear;
  j["response"] = cs.response;
  j["weights"] = cs.weights_col;
  j["owners"] = Json::array();
  for (const auto& o : cs.owners) {
    Json oj;
    oj["name"] = o.name;
    oj["kind"] = o.kind == OwnerSpec::Mu ? "mu" : (o.kind == OwnerSpec::Dpar ? "dpar" : "nlpar");
    oj["link"] = link_name(o.link);
    oj["terms"] = term_list_to_text(o.terms);
    j["owners"].push_back(oj);
  }
  if (cs.nonlinear) {
    j["expression"] = nl_expr_to_text(cs.nl_expr);
    j["nl_covariates"] = cs.nl_covariates;
    j["nl_params"] = cs.nl_params;
    j["mu_link"] = link_name(cs.mu_link);
  }
  j["blocks"] = Json::array();
  for (const auto& b : cs.blocks) j["blocks"].push_back(to_json(b));
  j["smooths"] = Json::array();
  for (const auto& s : cs.smooths) {
    Json sj;
    sj["owner"] = s.owner;
    sj["var"] = s.var;
    sj["k"] = s.k;
    sj["label"] = s.label;
    j["smooths"].push_back(sj);
  }
  j["constant_dpars"] = cs.constant_dpars;
  j["priors"] = Json::array();
  for (const auto& p : cs.priors) j["priors"].push_back(to_json(p));
  j["warnings"] = cs.warnings;
  return j;
}

}  // namespace hierform
