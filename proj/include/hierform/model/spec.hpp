#pragma once
// Assembly of parsed formulas into a model specification: the main response
// formula plus optional parameter formulas, which either address a
// distributional parameter of the family (sigma, zi) or a non-linear
// parameter appearing in the model expression.

#include <string>
#include <vector>

#include "hierform/formula/ast.hpp"
#include "hierform/model/family.hpp"
#include "hierform/model/prior.hpp"

namespace hierform {

struct ParamFormula {
  std::string name;
  FormulaAst ast;
  bool is_dpar = false;  // false: non-linear parameter
};

struct ModelSpec {
  FamilyId family = FamilyId::Gaussian;
  FormulaAst main;
  std::vector<ParamFormula> extras;  // declaration order
  bool nonlinear = false;
  std::vector<PriorSpec> priors;
};

inline ModelSpec build_spec(FormulaAst main, std::vector<FormulaAst> extra_formulas,
                            FamilyId family, bool nonlinear,
                            std::vector<PriorSpec> priors = {}) {
  ModelSpec spec;
  spec.family = family;
  spec.nonlinear = nonlinear;
  spec.priors = std::move(priors);

  if (!main.has_response || main.response.variables.empty())
    throw ValidationError("the model formula needs a response (y ~ ...)");
  if (main.response.variables.size() != 1)
    throw ValidationError(
        "combined left-hand sides (a + b ~ ...) are only valid for parameter formulas");
  if (nonlinear != main.nonlinear)
    throw ValidationError(nonlinear
                              ? "non-linear model requested but the main formula is linear"
                              : "the main formula is non-linear; pass the non-linear flag");
  spec.main = std::move(main);

  const FamilyInfo fam = family_info(family);
  std::vector<std::string> nl_idents;
  if (nonlinear) collect_nl_idents(spec.main.nl, nl_idents);

  auto is_dpar_name = [&](const std::string& n) {
    for (const auto& d : fam.extra_dpars)
      if (d == n) return true;
    return false;
  };
  auto in_expression = [&](const std::string& n) {
    for (const auto& id : nl_idents)
      if (id == n) return true;
    return false;
  };

  for (auto& f : extra_formulas) {
    if (f.nonlinear)
      throw ValidationError("parameter formulas must be linear");
    if (!f.response.aterms.empty())
      throw ValidationError("addition terms only apply to the response formula");
    for (const auto& name : f.response.variables) {
      for (const auto& have : spec.extras)
        if (have.name == name)
          throw ValidationError("duplicate formula for parameter '" + name + "'");
      ParamFormula pf;
      pf.name = name;
      pf.ast = f;
      pf.ast.response.variables = {name};
      if (name == "mu" || name == spec.main.response.variables[0])
        throw ValidationError("'" + name + "' cannot receive a parameter formula");
      if (is_dpar_name(name)) {
        pf.is_dpar = true;
      } else if (nonlinear && in_expression(name)) {
        pf.is_dpar = false;
      } else if (nonlinear) {
        throw ValidationError("formula given for '" + name +
                              "', which does not appear in the model expression");
      } else {
        throw ValidationError("'" + name + "' is not a parameter of family " + fam.name);
      }
      spec.extras.push_back(std::move(pf));
    }
  }

  if (nonlinear) {
    // every identifier without a formula must later resolve to a data column;
    // identifiers *with* formulas are the model's non-linear parameters
    bool any_nlpar = false;
    for (const auto& e : spec.extras)
      if (!e.is_dpar) any_nlpar = true;
    if (!any_nlpar)
      throw ValidationError(
          "a non-linear model needs at least one parameter formula (e.g. b ~ 1)");
  }
  return spec;
}

// names of the model's non-linear parameters, declaration order
inline std::vector<std::string> nlpar_names(const ModelSpec& spec) {
  std::vector<std::string> out;
  for (const auto& e : spec.extras)
    if (!e.is_dpar) out.push_back(e.name);
  return out;
}

}  // namespace hierform
