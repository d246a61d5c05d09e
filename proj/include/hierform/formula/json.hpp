#pragma once
// JSON views of formula ASTs (and structural equality via them).

#include <nlohmann/json.hpp>

#include "hierform/formula/ast.hpp"

namespace hierform {

using Json = nlohmann::ordered_json;

inline Json to_json(const NlExpr& e) {
  Json j;
  switch (e.kind) {
    case NlExpr::Literal:
      j["kind"] = "lit";
      j["value"] = e.lit;
      return j;
    case NlExpr::Ident:
      j["kind"] = "ident";
      j["name"] = e.name;
      return j;
    case NlExpr::Neg: j["kind"] = "neg"; break;
    case NlExpr::Add: j["kind"] = "add"; break;
    case NlExpr::Sub: j["kind"] = "sub"; break;
    case NlExpr::Mul: j["kind"] = "mul"; break;
    case NlExpr::Div: j["kind"] = "div"; break;
    case NlExpr::Pow: j["kind"] = "pow"; break;
    case NlExpr::Call:
      j["kind"] = "call";
      j["fun"] = e.name;
      break;
  }
  j["kids"] = Json::array();
  for (const auto& k : e.kids) j["kids"].push_back(to_json(k));
  return j;
}

inline Json to_json(const GroupExpr& g) {
  Json j;
  switch (g.kind) {
    case GroupExpr::Var:
      j["kind"] = "var";
      j["name"] = g.name;
      return j;
    case GroupExpr::Colon: j["kind"] = "colon"; break;
    case GroupExpr::Slash: j["kind"] = "slash"; break;
    case GroupExpr::Plus: j["kind"] = "plus"; break;
    case GroupExpr::Gr: j["kind"] = "gr"; break;
    case GroupExpr::Mm: {
      j["kind"] = "mm";
      j["members"] = Json::array();
      for (const auto& k : g.kids) j["members"].push_back(k.name);
      j["weights"] = g.mm_weights;
      return j;
    }
  }
  j["kids"] = Json::array();
  for (const auto& k : g.kids) j["kids"].push_back(to_json(k));
  return j;
}

inline Json to_json(const TermList& tl) {
  Json j;
  j["intercept"] = tl.intercept;
  j["fixed"] = Json::array();
  for (const auto& f : tl.fixed) j["fixed"].push_back(f.vars);
  j["specials"] = Json::array();
  for (const auto& sp : tl.specials) {
    Json s;
    s["fun"] = sp.fun;
    s["args"] = sp.args;
    s["kwargs"] = Json::object();
    for (const auto& [k, v] : sp.kwargs) s["kwargs"][k] = v;
    j["specials"].push_back(s);
  }
  j["groups"] = Json::array();
  for (const auto& g : tl.groups) {
    Json gj;
    gj["inner"] = to_json(*g.inner);
    gj["double_bar"] = g.double_bar;
    gj["id"] = g.id;
    gj["group"] = to_json(g.group);
    j["groups"].push_back(gj);
  }
  return j;
}

inline Json to_json(const FormulaAst& ast) {
  Json j;
  Json resp;
  resp["variables"] = ast.response.variables;
  resp["aterms"] = Json::array();
  for (const auto& a : ast.response.aterms) {
    Json aj;
    aj["fun"] = a.fun;
    aj["args"] = a.args;
    resp["aterms"].push_back(aj);
  }
  j["response"] = resp;
  j["nonlinear"] = ast.nonlinear;
  if (ast.nonlinear)
    j["expression"] = to_json(ast.nl);
  else
    j["terms"] = to_json(ast.terms);
  return j;
}

inline bool ast_equal(const FormulaAst& a, const FormulaAst& b) {
  return to_json(a) == to_json(b);
}

}  // namespace hierform
