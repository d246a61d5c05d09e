#pragma once
// Fixed-effect (population-level) design matrices with treatment contrasts.
// Factor columns drop the reference level (first appearance) when the term
// list has an intercept, and keep all levels otherwise.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hierform/formula/ast.hpp"
#include "hierform/model/checked.hpp"
#include "hierform/tabular/dataset.hpp"

namespace hierform {

struct FixedBlock {
  std::string owner;
  Eigen::MatrixXd X;  // n x p
  std::vector<std::string> col_names;
  bool has_intercept = false;
};

namespace detail {

struct NamedCols {
  std::vector<std::string> names;
  std::vector<Eigen::VectorXd> cols;
};

// columns contributed by one variable: 1 numeric column, or dummy columns
// for a factor (drop_first controls reference-level removal)
inline NamedCols variable_columns(const Dataset& d, const std::string& var, bool drop_first) {
  const Column& c = d.col(var);
  const auto n = static_cast<Eigen::Index>(d.n_rows());
  NamedCols out;
  if (c.kind != ColKind::Factor) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = c.as_double(static_cast<std::size_t>(i));
    out.names.push_back(var);
    out.cols.push_back(std::move(v));
    return out;
  }
  const std::size_t L = c.levels.size();
  if (drop_first && L < 2)
    throw ValidationError("factor '" + var + "' has a single level: no estimable contrast");
  for (std::size_t l = drop_first ? 1 : 0; l < L; ++l) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i)
      if (c.codes[static_cast<std::size_t>(i)] == static_cast<int>(l)) v[i] = 1.0;
    out.names.push_back(var + c.levels[l]);
    out.cols.push_back(std::move(v));
  }
  return out;
}

}  // namespace detail

inline FixedBlock build_fixed(const std::string& owner, const TermList& tl, const Dataset& d) {
  const auto n = static_cast<Eigen::Index>(d.n_rows());
  std::vector<std::string> names;
  std::vector<Eigen::VectorXd> cols;

  if (tl.intercept) {
    names.push_back("Intercept");
    cols.push_back(Eigen::VectorXd::Ones(n));
  }
  for (const auto& term : tl.fixed) {
    // interaction: cross product of each variable's column set
    std::vector<std::string> acc_names{""};
    std::vector<Eigen::VectorXd> acc_cols{Eigen::VectorXd::Ones(n)};
    for (const auto& var : term.vars) {
      auto vc = detail::variable_columns(d, var, tl.intercept);
      std::vector<std::string> next_names;
      std::vector<Eigen::VectorXd> next_cols;
      for (std::size_t a = 0; a < acc_cols.size(); ++a) {
        for (std::size_t b = 0; b < vc.cols.size(); ++b) {
          next_names.push_back(acc_names[a].empty() ? vc.names[b]
                                                    : acc_names[a] + ":" + vc.names[b]);
          next_cols.push_back(acc_cols[a].cwiseProduct(vc.cols[b]));
        }
      }
      acc_names = std::move(next_names);
      acc_cols = std::move(next_cols);
    }
    for (std::size_t k = 0; k < acc_cols.size(); ++k) {
      names.push_back(acc_names[k]);
      cols.push_back(std::move(acc_cols[k]));
    }
  }

  FixedBlock fb;
  fb.owner = owner;
  fb.has_intercept = tl.intercept;
  fb.col_names = names;
  fb.X.resize(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k)
    fb.X.col(static_cast<Eigen::Index>(k)) = cols[k];
  return fb;
}

}  // namespace hierform
