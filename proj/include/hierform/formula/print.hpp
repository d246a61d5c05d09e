#pragma once
// Canonical text rendering of formula ASTs.  parse(print(ast)) reproduces the
// AST structurally; non-linear expressions are parenthesized only where the
// precedence rules require it.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "hierform/formula/ast.hpp"

namespace hierform {

// shortest decimal form that strtod maps back to exactly x
inline std::string format_double(double x) {
  char buf[40];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) return buf;
  }
  return buf;
}

namespace detail {

// precedence: + - (1), * / (2), unary - (3), ^ (4), atom (5)
inline int nl_prec(const NlExpr& e) {
  switch (e.kind) {
    case NlExpr::Add:
    case NlExpr::Sub: return 1;
    case NlExpr::Mul:
    case NlExpr::Div: return 2;
    case NlExpr::Neg: return 3;
    case NlExpr::Pow: return 4;
    default: return 5;
  }
}

inline std::string nl_text(const NlExpr& e, int ctx) {
  std::string s;
  switch (e.kind) {
    case NlExpr::Literal: s = format_double(e.lit); break;
    case NlExpr::Ident: s = e.name; break;
    case NlExpr::Call: s = e.name + "(" + nl_text(e.kids[0], 1) + ")"; break;
    case NlExpr::Neg: s = "-" + nl_text(e.kids[0], 3); break;
    case NlExpr::Add: s = nl_text(e.kids[0], 1) + " + " + nl_text(e.kids[1], 2); break;
    case NlExpr::Sub: s = nl_text(e.kids[0], 1) + " - " + nl_text(e.kids[1], 2); break;
    case NlExpr::Mul: s = nl_text(e.kids[0], 2) + " * " + nl_text(e.kids[1], 3); break;
    case NlExpr::Div: s = nl_text(e.kids[0], 2) + " / " + nl_text(e.kids[1], 3); break;
    case NlExpr::Pow: s = nl_text(e.kids[0], 5) + "^" + nl_text(e.kids[1], 3); break;
  }
  if (nl_prec(e) < ctx) return "(" + s + ")";
  return s;
}

}  // namespace detail

inline std::string nl_expr_to_text(const NlExpr& e) { return detail::nl_text(e, 1); }

inline std::string group_expr_to_text(const GroupExpr& g) {
  switch (g.kind) {
    case GroupExpr::Var:
      return g.name;
    case GroupExpr::Colon:
      return group_expr_to_text(g.kids[0]) + ":" + group_expr_to_text(g.kids[1]);
    case GroupExpr::Slash:
      return group_expr_to_text(g.kids[0]) + "/" + group_expr_to_text(g.kids[1]);
    case GroupExpr::Plus:
      return group_expr_to_text(g.kids[0]) + " + " + group_expr_to_text(g.kids[1]);
    case GroupExpr::Gr:
      return "gr(" + group_expr_to_text(g.kids[0]) + ")";
    case GroupExpr::Mm: {
      std::string s = "mm(";
      for (std::size_t i = 0; i < g.kids.size(); ++i) {
        if (i) s += ", ";
        s += g.kids[i].name;
      }
      if (!g.mm_weights.empty()) {
        s += ", weights = cbind(";
        for (std::size_t i = 0; i < g.mm_weights.size(); ++i) {
          if (i) s += ", ";
          s += g.mm_weights[i];
        }
        s += ")";
      }
      return s + ")";
    }
  }
  return "";
}

inline std::string special_term_to_text(const SpecialTerm& sp) {
  std::string s = sp.fun + "(";
  bool first = true;
  for (const auto& a : sp.args) {
    if (!first) s += ", ";
    s += a;
    first = false;
  }
  for (const auto& [k, v] : sp.kwargs) {
    if (!first) s += ", ";
    s += k + " = " + v;
    first = false;
  }
  return s + ")";
}

inline std::string term_list_to_text(const TermList& tl) {
  std::string s;
  bool any = false;
  auto add = [&](const std::string& piece) {
    if (any) s += " + ";
    s += piece;
    any = true;
  };
  if (!tl.intercept) add("0");
  for (const auto& f : tl.fixed) add(f.label());
  for (const auto& sp : tl.specials) add(special_term_to_text(sp));
  for (const auto& g : tl.groups) {
    std::string bar = g.double_bar ? " || " : (g.id.empty() ? " | " : " |" + g.id + "| ");
    add("(" + term_list_to_text(*g.inner) + bar + group_expr_to_text(g.group) + ")");
  }
  if (!any || (tl.intercept && tl.fixed.empty() && tl.specials.empty() && tl.groups.empty()))
    return tl.intercept ? "1" : "0";
  return s;
}

inline std::string formula_to_text(const FormulaAst& ast) {
  std::string s;
  if (ast.has_response) {
    for (std::size_t i = 0; i < ast.response.variables.size(); ++i) {
      if (i) s += " + ";
      s += ast.response.variables[i];
    }
    for (std::size_t i = 0; i < ast.response.aterms.size(); ++i) {
      s += i == 0 ? " | " : " + ";
      const ATerm& a = ast.response.aterms[i];
      s += a.fun + "(";
      for (std::size_t j = 0; j < a.args.size(); ++j) {
        if (j) s += ", ";
        s += a.args[j];
      }
      s += ")";
    }
    s += " ~ ";
  }
  if (ast.nonlinear) return s + nl_expr_to_text(ast.nl);
  return s + term_list_to_text(ast.terms);
}

}  // namespace hierform
