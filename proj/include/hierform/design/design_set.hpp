#pragma once
// assemble(): compile a validated spec + data into the frozen numeric design
// used by the evaluator, sampler, predictors and codegen.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hierform/density/nl_program.hpp"
#include "hierform/design/fixed.hpp"
#include "hierform/design/random.hpp"
#include "hierform/design/smooth.hpp"
#include "hierform/model/checked.hpp"

namespace hierform {

struct OwnerDesign {
  std::string name;
  OwnerSpec::Kind kind = OwnerSpec::Mu;
  Link link = Link::Identity;
  FixedBlock fixed;
  std::vector<SmoothBlock> smooths;
};

struct DesignSet {
  CheckedSpec spec;
  std::vector<OwnerDesign> owners;   // parallel to spec.owners
  std::vector<RandomBlock> rblocks;  // parallel to spec.blocks
  Eigen::VectorXd y;
  std::vector<long long> y_int;  // counts when the family is integer-valued
  Eigen::VectorXd weights;
  bool has_weights = false;
  NlProgram nl_prog;
  Eigen::MatrixXd nl_cov;  // n x n_cov, appearance order
  Eigen::Index n = 0;

  const OwnerDesign* find_owner(const std::string& name) const {
    for (const auto& o : owners)
      if (o.name == name) return &o;
    return nullptr;
  }
};

inline DesignSet assemble(const CheckedSpec& cs, const Dataset& d) {
  DesignSet ds;
  ds.spec = cs;
  ds.n = static_cast<Eigen::Index>(d.n_rows());

  for (const auto& os : cs.owners) {
    OwnerDesign od;
    od.name = os.name;
    od.kind = os.kind;
    od.link = os.link;
    od.fixed = build_fixed(os.name, os.terms, d);
    for (const auto& sm : cs.smooths)
      if (sm.owner == os.name)
        od.smooths.push_back(build_smooth(sm.owner, sm.var, sm.k, sm.label, d));
    ds.owners.push_back(std::move(od));
  }

  for (const auto& b : cs.blocks) ds.rblocks.push_back(build_random(b, d));

  const Column& yc = d.col(cs.response);
  ds.y.resize(ds.n);
  for (Eigen::Index i = 0; i < ds.n; ++i)
    ds.y[i] = yc.as_double(static_cast<std::size_t>(i));
  if (family_info(cs.family).integer_response) {
    ds.y_int.resize(static_cast<std::size_t>(ds.n));
    for (Eigen::Index i = 0; i < ds.n; ++i)
      ds.y_int[static_cast<std::size_t>(i)] = yc.ints[static_cast<std::size_t>(i)];
  }

  ds.has_weights = !cs.weights_col.empty();
  if (ds.has_weights) {
    const Column& wc = d.col(cs.weights_col);
    ds.weights.resize(ds.n);
    for (Eigen::Index i = 0; i < ds.n; ++i)
      ds.weights[i] = wc.as_double(static_cast<std::size_t>(i));
  } else {
    ds.weights = Eigen::VectorXd::Ones(ds.n);
  }

  if (cs.nonlinear) {
    ds.nl_prog = compile_nl_expr(cs.nl_expr, cs.nl_covariates, cs.nl_params);
    ds.nl_cov.resize(ds.n, static_cast<Eigen::Index>(cs.nl_covariates.size()));
    for (std::size_t c = 0; c < cs.nl_covariates.size(); ++c) {
      const Column& col = d.col(cs.nl_covariates[c]);
      for (Eigen::Index i = 0; i < ds.n; ++i)
        ds.nl_cov(i, static_cast<Eigen::Index>(c)) =
            col.as_double(static_cast<std::size_t>(i));
    }
  }
  return ds;
}

}  // namespace hierform
