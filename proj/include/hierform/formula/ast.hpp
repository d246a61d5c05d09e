#pragma once
// Syntax tree for the extended mixed-model formula language:
//   response | aterm(...) ~ pterms + (gterms | [id |] group-expr) + s(x) + ...
// and non-linear formulas  y ~ <arithmetic over covariates and parameters>.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hierform/errors.hpp"

namespace hierform {

// addition term on the response:  weights(w), se(x), cens(c), trunc(lb), dec(d)
struct ATerm {
  std::string fun;
  std::vector<std::string> args;
  Span span;
};

struct ResponseSpec {
  // usually one variable; several for the combined-parameter shorthand
  // "a + b + c ~ rhs" (only meaningful for parameter formulas)
  std::vector<std::string> variables;
  std::vector<ATerm> aterms;
};

// main effect (one variable) or interaction a:b:c (several)
struct FixedTerm {
  std::vector<std::string> vars;
  Span span;

  std::string label() const {
    std::string s;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (i) s += ':';
      s += vars[i];
    }
    return s;
  }
};

// structured term such as s(x, k = 20), t2(a, b), mo(x), ...
struct SpecialTerm {
  std::string fun;
  std::vector<std::string> args;               // positional (variable names)
  std::map<std::string, std::string> kwargs;   // k = "20", weights handled separately
  Span span;
};

// grouping-factor expression to the right of | or ||
struct GroupExpr {
  enum Kind { Var, Colon, Slash, Plus, Gr, Mm };
  Kind kind = Var;
  std::string name;                       // Var
  std::vector<GroupExpr> kids;            // operator children / mm members
  std::vector<std::string> mm_weights;    // weights = cbind(...), empty if none
  Span span;
};

struct TermList;  // fwd

struct GroupTermRaw {
  std::shared_ptr<TermList> inner;  // left of the bar
  bool double_bar = false;          // || : correlations suppressed
  std::string id;                   // |ID| cross-formula correlation tag, "" if none
  GroupExpr group;
  Span span;
};

struct TermList {
  bool intercept = true;
  std::vector<FixedTerm> fixed;
  std::vector<SpecialTerm> specials;
  std::vector<GroupTermRaw> groups;
};

// arithmetic expression for non-linear formulas
struct NlExpr {
  enum Kind { Literal, Ident, Neg, Add, Sub, Mul, Div, Pow, Call };
  Kind kind = Literal;
  double lit = 0.0;
  std::string name;  // Ident: symbol; Call: function name (exp / log)
  std::vector<NlExpr> kids;
  Span span;
};

struct FormulaAst {
  ResponseSpec response;
  bool has_response = false;
  bool nonlinear = false;
  TermList terms;  // linear formulas
  NlExpr nl;       // nonlinear formulas
  std::string raw_text;
};

// collect every identifier of an NlExpr in first-appearance order
inline void collect_nl_idents(const NlExpr& e, std::vector<std::string>& out) {
  if (e.kind == NlExpr::Ident) {
    for (const auto& s : out)
      if (s == e.name) return;
    out.push_back(e.name);
    return;
  }
  for (const auto& k : e.kids) collect_nl_idents(k, out);
}

}  // namespace hierform
