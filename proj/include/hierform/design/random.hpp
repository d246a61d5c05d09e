#pragma once
// Random-effect blocks: sparse Z as row-wise coordinate lists.
//
// Each entry (row, level, coef, w) contributes w * u[level][coef] to the
// owner's linear predictor at that row.  For plain grouping factors, w is the
// inner design value (1 for the intercept); for multi-membership, w is the
// membership weight times the inner design value.  Dense materialization uses
// column index = level * q + coef.

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "hierform/design/fixed.hpp"
#include "hierform/model/blocks.hpp"
#include "hierform/model/checked.hpp"

namespace hierform {

struct ZEntry {
  int row = 0;
  int level = 0;
  int coef = 0;
  double w = 0;
};

struct RandomBlock {
  GroupBlockSpec spec;
  std::string label;
  std::vector<std::string> levels;      // sorted lexicographically
  int q = 0;                            // coefficients per level
  std::vector<std::string> coef_names;  // owner-qualified, e.g. "sigma_Intercept"
  std::vector<std::string> coef_owners;
  std::vector<ZEntry> entries;          // sorted by (row, coef, level)
  bool correlated = true;

  Eigen::MatrixXd dense(Eigen::Index n) const {
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(levels.size()) * q);
    for (const auto& e : entries) Z(e.row, e.level * q + e.coef) += e.w;
    return Z;
  }
};

namespace detail {

// level label of row i under a (possibly colon-combined) grouping
inline std::string combo_label(const Dataset& d, const std::vector<std::string>& factors,
                               std::size_t i) {
  std::string s;
  for (std::size_t f = 0; f < factors.size(); ++f) {
    if (f) s += ':';
    s += d.col(factors[f]).label(i);
  }
  return s;
}

inline int level_index(const std::vector<std::string>& levels, const std::string& lab) {
  const auto it = std::lower_bound(levels.begin(), levels.end(), lab);
  if (it == levels.end() || *it != lab) return -1;
  return static_cast<int>(it - levels.begin());
}

}  // namespace detail

// entry with the grouping level still as a label; shared by training design
// construction and prediction on new data (where unseen labels are possible)
struct LabeledEntry {
  int row = 0;
  std::string level;
  int coef = 0;
  double w = 0;
};

inline std::vector<LabeledEntry> labeled_entries(const GroupBlockSpec& bs,
                                                 const Dataset& d) {
  const std::size_t n = d.n_rows();
  std::vector<Eigen::MatrixXd> inner;
  for (const auto& t : bs.terms) inner.push_back(build_fixed(t.owner, *t.inner, d).X);

  // accumulate through a map so same-level multi-membership weights collapse;
  // label order equals sorted-level order, keeping entries (row, coef, level)
  std::map<std::tuple<int, int, std::string>, double> acc;
  int coef_base = 0;
  for (std::size_t t = 0; t < inner.size(); ++t) {
    const Eigen::MatrixXd& X = inner[t];
    for (int j = 0; j < X.cols(); ++j) {
      const int coef = coef_base + j;
      for (std::size_t i = 0; i < n; ++i) {
        const double x = X(static_cast<Eigen::Index>(i), j);
        if (bs.grouping.kind == Grouping::Factors) {
          if (x == 0.0) continue;
          acc[{static_cast<int>(i), coef,
               detail::combo_label(d, bs.grouping.factors, i)}] += x;
        } else {
          const std::size_t k = bs.grouping.members.size();
          for (std::size_t m = 0; m < k; ++m) {
            const double wm = bs.grouping.weights.empty()
                                  ? 1.0 / static_cast<double>(k)
                                  : d.col(bs.grouping.weights[m]).as_double(i);
            const double w = wm * x;
            if (w == 0.0) continue;
            acc[{static_cast<int>(i), coef, d.col(bs.grouping.members[m]).label(i)}] += w;
          }
        }
      }
    }
    coef_base += static_cast<int>(X.cols());
  }
  std::vector<LabeledEntry> out;
  out.reserve(acc.size());
  for (const auto& [key, w] : acc)
    out.push_back({std::get<0>(key), std::get<2>(key), std::get<1>(key), w});
  return out;
}

inline RandomBlock build_random(const GroupBlockSpec& bs, const Dataset& d) {
  RandomBlock rb;
  rb.spec = bs;
  rb.label = bs.grouping.label();
  rb.correlated = bs.correlated;
  const std::size_t n = d.n_rows();

  // --- level set ----------------------------------------------------------
  std::set<std::string> level_set;
  if (bs.grouping.kind == Grouping::Factors) {
    for (std::size_t i = 0; i < n; ++i)
      level_set.insert(detail::combo_label(d, bs.grouping.factors, i));
  } else {
    for (const auto& m : bs.grouping.members)
      for (std::size_t i = 0; i < n; ++i) level_set.insert(d.col(m).label(i));
  }
  rb.levels.assign(level_set.begin(), level_set.end());  // std::set: sorted

  // --- coefficient names, owner-major -------------------------------------
  for (const auto& t : bs.terms) {
    FixedBlock fb = build_fixed(t.owner, *t.inner, d);
    for (const auto& cn : fb.col_names) {
      rb.coef_owners.push_back(t.owner);
      rb.coef_names.push_back(t.owner == "mu" ? cn : t.owner + "_" + cn);
    }
  }
  rb.q = static_cast<int>(rb.coef_names.size());

  // --- entries ------------------------------------------------------------
  for (const auto& le : labeled_entries(bs, d)) {
    ZEntry e;
    e.row = le.row;
    e.coef = le.coef;
    e.level = detail::level_index(rb.levels, le.level);
    e.w = le.w;
    rb.entries.push_back(e);
  }
  return rb;
}

}  // namespace hierform
