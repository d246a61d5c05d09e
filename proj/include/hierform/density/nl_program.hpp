#pragma once
// Compiled form of a non-linear model expression: postfix program over
// per-row covariate values and per-row parameter values.  Evaluation is
// templated on the scalar so the same program serves plain doubles and
// dual numbers.
//
// ^ follows real-valued math: exp(b*log a) for a > 0; integer exponents are
// evaluated by repeated squaring so negative bases work; anything else is a
// domain error.  Errors surface as a flag (the sampler maps them to -inf).

#include <cmath>
#include <string>
#include <vector>

#include "hierform/errors.hpp"
#include "hierform/formula/ast.hpp"
#include "hierform/math/dual.hpp"

namespace hierform {

struct NlOp {
  enum K { PushLit, PushCov, PushPar, Neg, Add, Sub, Mul, Div, Pow, PowIntLit, Exp, Log };
  K k = PushLit;
  double lit = 0.0;
  long long ilit = 0;
  int idx = 0;
};

struct NlEvalStatus {
  bool ok = true;
  const char* what = "";
};

struct NlProgram {
  std::vector<NlOp> ops;
  int n_cov = 0;
  int n_par = 0;
  int max_depth = 0;

  template <class S>
  S eval(const double* cov, const S* par, S* stack, NlEvalStatus& st) const {
    int top = -1;
    for (const auto& op : ops) {
      switch (op.k) {
        case NlOp::PushLit: stack[++top] = S(op.lit); break;
        case NlOp::PushCov: stack[++top] = S(cov[op.idx]); break;
        case NlOp::PushPar: stack[++top] = par[op.idx]; break;
        case NlOp::Neg: stack[top] = -stack[top]; break;
        case NlOp::Add: --top; stack[top] = stack[top] + stack[top + 1]; break;
        case NlOp::Sub: --top; stack[top] = stack[top] - stack[top + 1]; break;
        case NlOp::Mul: --top; stack[top] = stack[top] * stack[top + 1]; break;
        case NlOp::Div: {
          --top;
          if (value_of(stack[top + 1]) == 0.0) {
            st = {false, "division by zero"};
            return S(0.0);
          }
          stack[top] = stack[top] / stack[top + 1];
          break;
        }
        case NlOp::PowIntLit: {
          using hierform::powi;
          stack[top] = powi(stack[top], op.ilit);
          break;
        }
        case NlOp::Pow: {
          --top;
          const double a = value_of(stack[top]);
          const double b = value_of(stack[top + 1]);
          if (a > 0.0) {
            using std::pow;
            using hierform::pow;
            stack[top] = pow(stack[top], stack[top + 1]);
          } else {
            const double br = std::nearbyint(b);
            if (std::fabs(b - br) <= 1e-9 && std::fabs(br) < 1e15) {
              using hierform::powi;
              stack[top] = powi(stack[top], static_cast<long long>(br));
            } else {
              st = {false, "non-positive base with non-integer exponent in '^'"};
              return S(0.0);
            }
          }
          break;
        }
        case NlOp::Exp: {
          using std::exp;
          using hierform::exp;
          stack[top] = exp(stack[top]);
          break;
        }
        case NlOp::Log: {
          if (value_of(stack[top]) <= 0.0) {
            st = {false, "log of a non-positive value"};
            return S(0.0);
          }
          using std::log;
          using hierform::log;
          stack[top] = log(stack[top]);
          break;
        }
      }
      if (!is_finite(stack[top])) {
        st = {false, "non-finite intermediate value"};
        return S(0.0);
      }
    }
    return stack[0];
  }
};

namespace detail {

inline void compile_nl(const NlExpr& e, const std::vector<std::string>& cov_names,
                       const std::vector<std::string>& par_names, NlProgram& prog,
                       int& depth, int& cur) {
  auto push = [&](NlOp op) {
    prog.ops.push_back(op);
  };
  switch (e.kind) {
    case NlExpr::Literal: {
      NlOp op;
      op.k = NlOp::PushLit;
      op.lit = e.lit;
      push(op);
      depth = std::max(depth, ++cur);
      return;
    }
    case NlExpr::Ident: {
      NlOp op;
      for (std::size_t i = 0; i < par_names.size(); ++i)
        if (par_names[i] == e.name) {
          op.k = NlOp::PushPar;
          op.idx = static_cast<int>(i);
          push(op);
          depth = std::max(depth, ++cur);
          return;
        }
      for (std::size_t i = 0; i < cov_names.size(); ++i)
        if (cov_names[i] == e.name) {
          op.k = NlOp::PushCov;
          op.idx = static_cast<int>(i);
          push(op);
          depth = std::max(depth, ++cur);
          return;
        }
      throw ValidationError("unbound identifier '" + e.name + "' in model expression");
    }
    case NlExpr::Neg:
      compile_nl(e.kids[0], cov_names, par_names, prog, depth, cur);
      push({NlOp::Neg});
      return;
    case NlExpr::Add:
    case NlExpr::Sub:
    case NlExpr::Mul:
    case NlExpr::Div: {
      compile_nl(e.kids[0], cov_names, par_names, prog, depth, cur);
      compile_nl(e.kids[1], cov_names, par_names, prog, depth, cur);
      NlOp op;
      op.k = e.kind == NlExpr::Add   ? NlOp::Add
             : e.kind == NlExpr::Sub ? NlOp::Sub
             : e.kind == NlExpr::Mul ? NlOp::Mul
                                     : NlOp::Div;
      push(op);
      --cur;
      return;
    }
    case NlExpr::Pow: {
      compile_nl(e.kids[0], cov_names, par_names, prog, depth, cur);
      const NlExpr& ex = e.kids[1];
      const bool neg_lit = ex.kind == NlExpr::Neg && ex.kids[0].kind == NlExpr::Literal;
      if (ex.kind == NlExpr::Literal || neg_lit) {
        const double v = neg_lit ? -ex.kids[0].lit : ex.lit;
        if (std::nearbyint(v) == v && std::fabs(v) < 1e15) {
          NlOp op;
          op.k = NlOp::PowIntLit;
          op.ilit = static_cast<long long>(v);
          push(op);
          return;
        }
      }
      compile_nl(ex, cov_names, par_names, prog, depth, cur);
      push({NlOp::Pow});
      --cur;
      return;
    }
    case NlExpr::Call: {
      compile_nl(e.kids[0], cov_names, par_names, prog, depth, cur);
      push({e.name == "exp" ? NlOp::Exp : NlOp::Log});
      return;
    }
  }
}

}  // namespace detail

inline NlProgram compile_nl_expr(const NlExpr& e, const std::vector<std::string>& cov_names,
                                 const std::vector<std::string>& par_names) {
  NlProgram prog;
  prog.n_cov = static_cast<int>(cov_names.size());
  prog.n_par = static_cast<int>(par_names.size());
  int depth = 0, cur = 0;
  detail::compile_nl(e, cov_names, par_names, prog, depth, cur);
  prog.max_depth = std::max(depth, 1);
  return prog;
}

}  // namespace hierform
