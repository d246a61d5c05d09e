#pragma once
// Prior specifications.  A PriorSpec pairs a density with a target selector;
// resolution against a concrete design happens later (design/priors).

#include <cmath>
#include <cstdio>
#include <string>

#include "hierform/errors.hpp"

namespace hierform {

struct PriorDensity {
  enum Kind { Flat, Normal, StudentT, HalfStudentT, Lkj, UniformProb };
  Kind kind = Flat;
  double df = 0, loc = 0, scale = 0, eta = 0;

  static PriorDensity flat() { return {}; }
  static PriorDensity normal(double mu, double sd) {
    if (!(sd > 0)) throw ValidationError("normal prior needs sd > 0");
    PriorDensity p;
    p.kind = Normal;
    p.loc = mu;
    p.scale = sd;
    return p;
  }
  static PriorDensity student_t(double df, double mu, double sd) {
    if (!(df > 0)) throw ValidationError("student_t prior needs df > 0");
    if (!(sd > 0)) throw ValidationError("student_t prior needs sd > 0");
    PriorDensity p;
    p.kind = StudentT;
    p.df = df;
    p.loc = mu;
    p.scale = sd;
    return p;
  }
  static PriorDensity half_student_t(double df, double sd) {
    PriorDensity p = student_t(df, 0.0, sd);
    p.kind = HalfStudentT;
    return p;
  }
  static PriorDensity lkj(double eta) {
    if (!(eta > 0)) throw ValidationError("lkj prior needs eta > 0");
    PriorDensity p;
    p.kind = Lkj;
    p.eta = eta;
    return p;
  }
  static PriorDensity uniform_prob() {
    PriorDensity p;
    p.kind = UniformProb;
    return p;
  }

  std::string text() const {
    auto fmt = [](double x) {
      char b[32];
      std::snprintf(b, sizeof(b), "%g", x);
      return std::string(b);
    };
    switch (kind) {
      case Flat: return "flat";
      case Normal: return "normal(" + fmt(loc) + ", " + fmt(scale) + ")";
      case StudentT:
        return "student_t(" + fmt(df) + ", " + fmt(loc) + ", " + fmt(scale) + ")";
      case HalfStudentT: return "student_t(" + fmt(df) + ", 0, " + fmt(scale) + ")";
      case Lkj: return "lkj_corr_cholesky(" + fmt(eta) + ")";
      case UniformProb: return "uniform(0, 1)";
    }
    return "";
  }
};

struct PriorTarget {
  enum Kind {
    Coef,       // one named coefficient of an owner parameter
    CoefClass,  // every coefficient of an owner parameter
    Intercept,  // owner's intercept column
    Sd,         // group s.d.; coef empty = every coef of the group
    Cor,        // group correlation matrix
    SmoothSd,   // wiggliness s.d. of one smooth (or all, if name empty)
    FamilyPar,  // sigma / zi constants
  };
  Kind kind = CoefClass;
  std::string owner;  // parameter the coefficient belongs to ("mu" for the response)
  std::string coef;
  std::string group;
  std::string name;  // smooth label or family parameter name
};

struct PriorSpec {
  PriorDensity density;
  PriorTarget target;
};

}  // namespace hierform
