#pragma once
// Expansion of grouping expressions to canonical groupings.
//
//   g                  -> [g]
//   g1:g2              -> [g1:g2]              (one grouping, combined factor)
//   g1/g2              -> [g1, g1:g2]          (nesting; left fold for chains)
//   g1 + g2            -> [g1, g2]             (union, duplicates removed)
//   gr(e)              -> expansion of e
//   mm(s1, s2, ...)    -> [multi-membership grouping]
//
// Expansion is confluent: the rules above commute, so any rewrite order gives
// the same canonical list (exercised by property tests).

#include <string>
#include <vector>

#include "hierform/errors.hpp"
#include "hierform/formula/ast.hpp"

namespace hierform {

struct Grouping {
  enum Kind { Factors, MultiMember };
  Kind kind = Factors;
  std::vector<std::string> factors;  // colon-combined factor columns, in order
  std::vector<std::string> members;  // mm member columns
  std::vector<std::string> weights;  // mm weight columns, empty = equal weights

  std::string label() const {
    if (kind == MultiMember) {
      std::string s = "mm";
      for (const auto& m : members) s += m;
      return s;
    }
    std::string s;
    for (std::size_t i = 0; i < factors.size(); ++i) {
      if (i) s += ':';
      s += factors[i];
    }
    return s;
  }

  bool operator==(const Grouping& o) const {
    return kind == o.kind && factors == o.factors && members == o.members &&
           weights == o.weights;
  }
};

namespace detail {

inline std::vector<Grouping> expand_group(const GroupExpr& g) {
  switch (g.kind) {
    case GroupExpr::Var: {
      Grouping gr;
      gr.factors.push_back(g.name);
      return {gr};
    }
    case GroupExpr::Gr:
      return expand_group(g.kids[0]);
    case GroupExpr::Mm: {
      Grouping gr;
      gr.kind = Grouping::MultiMember;
      for (const auto& m : g.kids) gr.members.push_back(m.name);
      gr.weights = g.mm_weights;
      return {gr};
    }
    case GroupExpr::Colon: {
      auto l = expand_group(g.kids[0]);
      auto r = expand_group(g.kids[1]);
      if (l.size() != 1 || r.size() != 1 || l[0].kind != Grouping::Factors ||
          r[0].kind != Grouping::Factors)
        throw ValidationError("':' expects plain grouping factors on both sides");
      Grouping gr;
      gr.factors = l[0].factors;
      gr.factors.insert(gr.factors.end(), r[0].factors.begin(), r[0].factors.end());
      return {gr};
    }
    case GroupExpr::Slash: {
      auto l = expand_group(g.kids[0]);
      auto r = expand_group(g.kids[1]);
      if (r.size() != 1 || r[0].kind != Grouping::Factors)
        throw ValidationError("'/' expects a plain grouping factor on the right");
      for (const auto& e : l)
        if (e.kind != Grouping::Factors)
          throw ValidationError("'/' expects plain grouping factors on the left");
      std::vector<Grouping> out = l;
      Grouping deepest = l.back();
      deepest.factors.insert(deepest.factors.end(), r[0].factors.begin(),
                             r[0].factors.end());
      out.push_back(std::move(deepest));
      return out;
    }
    case GroupExpr::Plus: {
      auto out = expand_group(g.kids[0]);
      for (auto& e : expand_group(g.kids[1])) {
        bool dup = false;
        for (const auto& have : out)
          if (have == e) {
            dup = true;
            break;
          }
        if (!dup) out.push_back(std::move(e));
      }
      return out;
    }
  }
  throw ValidationError("unreachable grouping kind");
}

}  // namespace detail

inline std::vector<Grouping> expand_group_expr(const GroupExpr& g) {
  return detail::expand_group(g);
}

}  // namespace hierform
