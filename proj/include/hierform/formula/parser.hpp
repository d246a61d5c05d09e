#pragma once
// Recursive-descent parser for the formula language.
//
// Linear formulas: response [| aterms] ~ terms, where terms mix fixed effects
// (a, a:b, a*b), structured terms (s(x), ...), intercept markers (1, 0, -1)
// and group terms ((gterms | group), (gterms || group), (gterms |id| group)).
// Group expressions support g1:g2, g1/g2, g1+g2, gr(...), mm(...).
//
// Non-linear formulas: response ~ arithmetic over identifiers with + - * / ^,
// unary minus, parentheses and exp()/log() calls.  Precedence: ^ binds
// tightest (right-assoc), then unary minus, then * /, then + -, so
// -2^2 == -(2^2) and 2^-3 parses.

#include <set>
#include <string>
#include <vector>

#include "hierform/formula/ast.hpp"
#include "hierform/formula/lexer.hpp"

namespace hierform {

namespace detail {

inline const std::set<std::string>& aterm_names() {
  static const std::set<std::string> s{"weights", "se", "cens", "trunc", "dec"};
  return s;
}
inline const std::set<std::string>& special_names() {
  static const std::set<std::string> s{"s", "t2", "cs", "mo", "me", "gp"};
  return s;
}

inline bool contains_mm(const GroupExpr& g) {
  if (g.kind == GroupExpr::Mm) return true;
  for (const auto& k : g.kids)
    if (contains_mm(k)) return true;
  return false;
}

class FormulaParser {
 public:
  FormulaParser(const std::string& text, std::vector<Token> toks)
      : text_(text), toks_(std::move(toks)) {}

  FormulaAst parse_linear() {
    FormulaAst ast;
    ast.raw_text = text_;
    // a bare term list (no '~') is legal for inspection / expansion tools
    bool has_tilde = false;
    for (const auto& t : toks_)
      if (t.kind == Tok::Tilde) has_tilde = true;
    if (has_tilde) {
      ast.has_response = true;
      ast.response = parse_lhs();
      expect(Tok::Tilde, "expected '~' between response and predictors");
    }
    ast.terms = parse_term_list(/*allow_groups=*/true, /*allow_specials=*/true);
    if (cur().kind == Tok::Tilde)
      fail("a formula may contain only one '~'");
    expect(Tok::End, "unexpected trailing input after formula");
    return ast;
  }

  FormulaAst parse_nonlinear() {
    FormulaAst ast;
    ast.raw_text = text_;
    ast.has_response = true;
    ast.nonlinear = true;
    ast.response = parse_lhs();
    if (ast.response.variables.size() != 1)
      fail("a non-linear formula needs exactly one response variable");
    expect(Tok::Tilde, "expected '~' between response and the model expression");
    ast.nl = parse_nl_expr();
    if (cur().kind == Tok::Bar || cur().kind == Tok::DblBar)
      fail("'|' is not valid inside a non-linear formula");
    if (cur().kind == Tok::Tilde)
      fail("a formula may contain only one '~'");
    expect(Tok::End, "unexpected trailing input after expression");
    return ast;
  }

  NlExpr parse_expression_only() {
    NlExpr e = parse_nl_expr();
    expect(Tok::End, "unexpected trailing input after expression");
    return e;
  }

 private:
  const std::string& text_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t k = 1) const {
    return toks_[pos_ + k < toks_.size() ? pos_ + k : toks_.size() - 1];
  }
  Token take() { return toks_[pos_++]; }
  bool accept(Tok k) {
    if (cur().kind == k) {
      ++pos_;
      return true;
    }
    return false;
  }
  Token expect(Tok k, const std::string& msg) {
    if (cur().kind != k)
      throw ParseError(msg + " (found " + tok_name(cur().kind) + ")", cur().span);
    return take();
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, cur().span); }
  [[noreturn]] void fail_at(const std::string& msg, Span s) const { throw ParseError(msg, s); }

  // ---- response ----------------------------------------------------------

  ResponseSpec parse_lhs() {
    ResponseSpec r;
    Token first = expect(Tok::Ident, "expected a response variable");
    r.variables.push_back(first.text);
    while (cur().kind == Tok::Plus) {
      take();
      Token v = expect(Tok::Ident, "expected a variable after '+' on the left-hand side");
      r.variables.push_back(v.text);
    }
    if (cur().kind == Tok::Bar) {
      if (r.variables.size() > 1)
        fail("response addition terms cannot follow a combined left-hand side");
      take();
      r.aterms.push_back(parse_aterm());
      while (accept(Tok::Plus)) r.aterms.push_back(parse_aterm());
    }
    return r;
  }

  ATerm parse_aterm() {
    Token name = expect(Tok::Ident, "expected an addition term such as weights(...)");
    if (!aterm_names().count(name.text))
      fail_at("unknown addition term '" + name.text + "'", name.span);
    ATerm a;
    a.fun = name.text;
    a.span = name.span;
    expect(Tok::LParen, "expected '(' after '" + name.text + "'");
    a.args.push_back(expect(Tok::Ident, "expected a variable inside " + name.text + "(...)").text);
    while (accept(Tok::Comma))
      a.args.push_back(expect(Tok::Ident, "expected a variable").text);
    Token close = expect(Tok::RParen, "expected ')' to close " + name.text + "(...)");
    a.span.end = close.span.end;
    return a;
  }

  // ---- predictor terms ---------------------------------------------------

  TermList parse_term_list(bool allow_groups, bool allow_specials) {
    TermList tl;
    bool removed_intercept = false;
    bool first = true;
    for (;;) {
      if (first && (cur().kind == Tok::End || cur().kind == Tok::RParen ||
                    cur().kind == Tok::Bar || cur().kind == Tok::DblBar))
        fail("expected at least one term (use 1 for an intercept-only formula)");
      first = false;

      if (cur().kind == Tok::Number) {
        Token n = take();
        if (n.num == 1.0) {
          // explicit intercept; nothing to do unless it was removed before
        } else if (n.num == 0.0) {
          removed_intercept = true;
        } else {
          fail_at("numeric literals other than 0 and 1 are not valid terms", n.span);
        }
      } else if (cur().kind == Tok::LParen) {
        if (!allow_groups)
          fail("group terms are not allowed here");
        tl.groups.push_back(parse_group_term());
      } else if (cur().kind == Tok::Ident) {
        if (peek().kind == Tok::LParen) {
          Token fun = cur();
          if (!special_names().count(fun.text))
            fail_at("unknown function '" + fun.text +
                    "' in predictor; transform the data beforehand instead",
                    fun.span);
          if (!allow_specials)
            fail_at("'" + fun.text + "(...)' is not allowed inside a group term", fun.span);
          tl.specials.push_back(parse_special());
        } else {
          for (auto& t : parse_product()) append_fixed(tl, std::move(t));
        }
      } else {
        fail("expected a predictor term");
      }

      if (accept(Tok::Plus)) continue;
      if (cur().kind == Tok::Minus) {
        Token minus = take();
        if (cur().kind == Tok::Number && cur().num == 1.0) {
          take();
          removed_intercept = true;
          if (accept(Tok::Plus)) continue;
          break;
        }
        fail_at("'-' may only be used as '- 1' to remove the intercept", minus.span);
      }
      break;
    }
    if (removed_intercept) tl.intercept = false;
    return tl;
  }

  void append_fixed(TermList& tl, FixedTerm t) {
    for (const auto& e : tl.fixed)
      if (e.vars == t.vars) return;  // a + a, or a*b overlapping with earlier terms
    tl.fixed.push_back(std::move(t));
  }

  // ident(:ident)* chains combined by '*', expanded to mains + interactions
  std::vector<FixedTerm> parse_product() {
    std::vector<FixedTerm> acc;
    acc.push_back(parse_interaction());
    while (cur().kind == Tok::Star) {
      take();
      FixedTerm rhs = parse_interaction();
      std::vector<FixedTerm> next = acc;
      next.push_back(rhs);
      for (const auto& left : acc) {
        FixedTerm comb;
        comb.vars = left.vars;
        comb.vars.insert(comb.vars.end(), rhs.vars.begin(), rhs.vars.end());
        comb.span = Span{left.span.begin, rhs.span.end};
        next.push_back(std::move(comb));
      }
      acc = std::move(next);
    }
    return acc;
  }

  FixedTerm parse_interaction() {
    FixedTerm t;
    Token v = expect(Tok::Ident, "expected a variable name");
    t.vars.push_back(v.text);
    t.span = v.span;
    while (cur().kind == Tok::Colon) {
      take();
      Token w = expect(Tok::Ident, "expected a variable after ':'");
      t.vars.push_back(w.text);
      t.span.end = w.span.end;
    }
    return t;
  }

  SpecialTerm parse_special() {
    SpecialTerm sp;
    Token fun = take();  // ident, verified by caller
    sp.fun = fun.text;
    sp.span = fun.span;
    expect(Tok::LParen, "expected '('");
    bool seen_kwarg = false;
    for (;;) {
      if (cur().kind == Tok::Ident && peek().kind == Tok::Equals) {
        Token key = take();
        take();  // '='
        if (cur().kind == Tok::Number || cur().kind == Tok::Ident) {
          sp.kwargs[key.text] = take().text;
        } else {
          fail("expected a value after '" + key.text + " ='");
        }
        seen_kwarg = true;
      } else if (cur().kind == Tok::Ident) {
        if (seen_kwarg) fail("positional arguments must precede named arguments");
        sp.args.push_back(take().text);
      } else {
        fail("expected an argument in " + sp.fun + "(...)");
      }
      if (accept(Tok::Comma)) continue;
      break;
    }
    Token close = expect(Tok::RParen, "expected ')' to close " + sp.fun + "(...)");
    sp.span.end = close.span.end;
    if (sp.args.empty())
      fail_at(sp.fun + "(...) needs at least one variable", sp.span);
    return sp;
  }

  // ---- group terms -------------------------------------------------------

  GroupTermRaw parse_group_term() {
    GroupTermRaw g;
    Token open = expect(Tok::LParen, "expected '('");
    g.span = open.span;
    g.inner = std::make_shared<TermList>(
        parse_term_list(/*allow_groups=*/false, /*allow_specials=*/false));
    if (cur().kind == Tok::DblBar) {
      take();
      g.double_bar = true;
    } else if (cur().kind == Tok::Bar) {
      take();
      // |ID| form: identifier immediately followed by another bar
      if (cur().kind == Tok::Ident && peek().kind == Tok::Bar) {
        g.id = take().text;
        take();  // second bar
      }
    } else {
      fail("expected '|' or '||' inside a group term");
    }
    g.group = parse_group_expr();
    Token close = expect(Tok::RParen, "expected ')' to close the group term");
    g.span.end = close.span.end;
    return g;
  }

  GroupExpr parse_group_expr() {  // '+' level
    GroupExpr e = parse_group_slash();
    while (cur().kind == Tok::Plus) {
      take();
      GroupExpr rhs = parse_group_slash();
      GroupExpr up;
      up.kind = GroupExpr::Plus;
      up.span = Span{e.span.begin, rhs.span.end};
      up.kids.push_back(std::move(e));
      up.kids.push_back(std::move(rhs));
      check_no_mm_operand(up);
      e = std::move(up);
    }
    return e;
  }

  GroupExpr parse_group_slash() {
    GroupExpr e = parse_group_colon();
    while (cur().kind == Tok::Slash) {
      take();
      GroupExpr rhs = parse_group_colon();
      GroupExpr up;
      up.kind = GroupExpr::Slash;
      up.span = Span{e.span.begin, rhs.span.end};
      up.kids.push_back(std::move(e));
      up.kids.push_back(std::move(rhs));
      check_no_mm_operand(up);
      e = std::move(up);
    }
    return e;
  }

  GroupExpr parse_group_colon() {
    GroupExpr e = parse_group_atom();
    while (cur().kind == Tok::Colon) {
      take();
      GroupExpr rhs = parse_group_atom();
      GroupExpr up;
      up.kind = GroupExpr::Colon;
      up.span = Span{e.span.begin, rhs.span.end};
      up.kids.push_back(std::move(e));
      up.kids.push_back(std::move(rhs));
      check_no_mm_operand(up);
      e = std::move(up);
    }
    return e;
  }

  void check_no_mm_operand(const GroupExpr& op) {
    for (const auto& k : op.kids)
      if (contains_mm(k))
        fail_at("mm(...) cannot be combined with ':', '/' or '+'", op.span);
  }

  GroupExpr parse_group_atom() {
    if (cur().kind == Tok::Ident && cur().text == "gr" && peek().kind == Tok::LParen) {
      Token fun = take();
      take();  // (
      GroupExpr inner = parse_group_expr();
      Token close = expect(Tok::RParen, "expected ')' to close gr(...)");
      GroupExpr e;
      e.kind = GroupExpr::Gr;
      e.span = Span{fun.span.begin, close.span.end};
      e.kids.push_back(std::move(inner));
      return e;
    }
    if (cur().kind == Tok::Ident && cur().text == "mm" && peek().kind == Tok::LParen) {
      return parse_mm();
    }
    if (cur().kind == Tok::Ident) {
      if (peek().kind == Tok::LParen)
        fail_at("unknown grouping function '" + cur().text + "' (expected gr or mm)",
                cur().span);
      Token v = take();
      GroupExpr e;
      e.kind = GroupExpr::Var;
      e.name = v.text;
      e.span = v.span;
      return e;
    }
    fail("expected a grouping factor");
  }

  GroupExpr parse_mm() {
    Token fun = take();  // mm
    expect(Tok::LParen, "expected '(' after mm");
    GroupExpr e;
    e.kind = GroupExpr::Mm;
    e.span = fun.span;
    bool saw_weights = false;
    for (;;) {
      if (cur().kind == Tok::Ident && cur().text == "weights" && peek().kind == Tok::Equals) {
        take();
        take();  // =
        Token cb = expect(Tok::Ident, "expected cbind(...) after weights =");
        if (cb.text != "cbind")
          fail_at("weights must be given as cbind(w1, w2, ...)", cb.span);
        expect(Tok::LParen, "expected '(' after cbind");
        e.mm_weights.push_back(expect(Tok::Ident, "expected a weight column").text);
        while (accept(Tok::Comma))
          e.mm_weights.push_back(expect(Tok::Ident, "expected a weight column").text);
        expect(Tok::RParen, "expected ')' to close cbind(...)");
        saw_weights = true;
      } else if (cur().kind == Tok::Ident) {
        if (saw_weights) fail("member factors must precede weights =");
        Token m = take();
        GroupExpr member;
        member.kind = GroupExpr::Var;
        member.name = m.text;
        member.span = m.span;
        e.kids.push_back(std::move(member));
      } else {
        fail("expected a member factor or weights = cbind(...) in mm(...)");
      }
      if (accept(Tok::Comma)) continue;
      break;
    }
    Token close = expect(Tok::RParen, "expected ')' to close mm(...)");
    e.span.end = close.span.end;
    if (e.kids.size() < 2)
      fail_at("mm(...) needs at least two member factors", e.span);
    if (!e.mm_weights.empty() && e.mm_weights.size() != e.kids.size())
      fail_at("mm(...) got " + std::to_string(e.kids.size()) + " members but " +
                  std::to_string(e.mm_weights.size()) + " weight columns",
              e.span);
    return e;
  }

  // ---- non-linear expressions -------------------------------------------

  NlExpr parse_nl_expr() {  // + -
    NlExpr e = parse_nl_muldiv();
    for (;;) {
      if (cur().kind == Tok::Plus || cur().kind == Tok::Minus) {
        bool plus = take().kind == Tok::Plus;
        NlExpr rhs = parse_nl_muldiv();
        NlExpr up;
        up.kind = plus ? NlExpr::Add : NlExpr::Sub;
        up.span = Span{e.span.begin, rhs.span.end};
        up.kids.push_back(std::move(e));
        up.kids.push_back(std::move(rhs));
        e = std::move(up);
      } else {
        return e;
      }
    }
  }

  NlExpr parse_nl_muldiv() {
    NlExpr e = parse_nl_unary();
    for (;;) {
      if (cur().kind == Tok::Star || cur().kind == Tok::Slash) {
        bool mul = take().kind == Tok::Star;
        NlExpr rhs = parse_nl_unary();
        NlExpr up;
        up.kind = mul ? NlExpr::Mul : NlExpr::Div;
        up.span = Span{e.span.begin, rhs.span.end};
        up.kids.push_back(std::move(e));
        up.kids.push_back(std::move(rhs));
        e = std::move(up);
      } else {
        return e;
      }
    }
  }

  NlExpr parse_nl_unary() {
    if (cur().kind == Tok::Minus) {
      Token m = take();
      NlExpr inner = parse_nl_unary();
      NlExpr e;
      e.kind = NlExpr::Neg;
      e.span = Span{m.span.begin, inner.span.end};
      e.kids.push_back(std::move(inner));
      return e;
    }
    return parse_nl_power();
  }

  NlExpr parse_nl_power() {
    NlExpr base = parse_nl_atom();
    if (cur().kind == Tok::Hat) {
      take();
      NlExpr expo = parse_nl_unary();  // right-assoc, exponent may carry unary minus
      NlExpr e;
      e.kind = NlExpr::Pow;
      e.span = Span{base.span.begin, expo.span.end};
      e.kids.push_back(std::move(base));
      e.kids.push_back(std::move(expo));
      return e;
    }
    return base;
  }

  NlExpr parse_nl_atom() {
    if (cur().kind == Tok::Number) {
      Token n = take();
      NlExpr e;
      e.kind = NlExpr::Literal;
      e.lit = n.num;
      e.span = n.span;
      return e;
    }
    if (cur().kind == Tok::Ident) {
      Token id = take();
      if (cur().kind == Tok::LParen) {
        if (id.text != "exp" && id.text != "log")
          fail_at("unsupported function '" + id.text +
                  "' in non-linear formula (only exp and log)",
                  id.span);
        take();  // (
        NlExpr arg = parse_nl_expr();
        Token close = expect(Tok::RParen, "expected ')' to close " + id.text + "(...)");
        NlExpr e;
        e.kind = NlExpr::Call;
        e.name = id.text;
        e.span = Span{id.span.begin, close.span.end};
        e.kids.push_back(std::move(arg));
        return e;
      }
      NlExpr e;
      e.kind = NlExpr::Ident;
      e.name = id.text;
      e.span = id.span;
      return e;
    }
    if (cur().kind == Tok::LParen) {
      Token open = take();
      NlExpr e = parse_nl_expr();
      Token close = expect(Tok::RParen, "expected ')'");
      e.span = Span{open.span.begin, close.span.end};
      return e;
    }
    fail("expected a number, identifier, function call or parenthesized expression");
  }
};

}  // namespace detail

inline FormulaAst parse_formula(const std::string& text) {
  detail::FormulaParser p(text, lex_formula(text));
  return p.parse_linear();
}

inline FormulaAst parse_nl_formula(const std::string& text) {
  detail::FormulaParser p(text, lex_formula(text));
  return p.parse_nonlinear();
}

inline NlExpr parse_nl_expression(const std::string& text) {
  detail::FormulaParser p(text, lex_formula(text));
  return p.parse_expression_only();
}

}  // namespace hierform
