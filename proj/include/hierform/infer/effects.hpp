#pragma once
// Marginal effects: predicted response over a grid of one focal predictor,
// non-focal numerics held at their training means, factors at their reference
// level; optional condition rows produce one grid block each.  The smooth
// variant evaluates just the spline part, centered to mean zero per draw.

#include <Eigen/Dense>
#include <set>
#include <string>
#include <vector>

#include "hierform/infer/predict.hpp"
#include "hierform/math/stats.hpp"

namespace hierform {

struct EffectsGrid {
  std::string focal;
  bool focal_is_factor = false;
  // one entry per output row (condition blocks concatenated)
  std::vector<std::string> condition;  // "" without conditions
  std::vector<double> value;           // numeric focal
  std::vector<std::string> level;      // factor focal
  std::vector<double> estimate, lower, upper;
};

namespace detail {

// variables the design needs, with how each one defaults
struct VarDefaults {
  std::vector<std::string> names;
  std::set<std::string> grouping;

  static VarDefaults collect(const CheckedSpec& cs) {
    VarDefaults vd;
    std::set<std::string> seen;
    auto add = [&](const std::string& v) {
      if (seen.insert(v).second) vd.names.push_back(v);
    };
    for (const auto& o : cs.owners) {
      for (const auto& ft : o.terms.fixed)
        for (const auto& v : ft.vars) add(v);
      for (const auto& st : o.terms.specials)
        if (!st.args.empty()) add(st.args[0]);
      for (const auto& gt : o.terms.groups)
        for (const auto& ft : gt.inner->fixed)
          for (const auto& v : ft.vars) add(v);
    }
    for (const auto& b : cs.blocks) {
      if (b.grouping.kind == Grouping::Factors)
        for (const auto& f : b.grouping.factors) {
          add(f);
          vd.grouping.insert(f);
        }
      else {
        for (const auto& m : b.grouping.members) {
          add(m);
          vd.grouping.insert(m);
        }
        for (const auto& w : b.grouping.weights) add(w);
      }
    }
    for (const auto& v : cs.nl_covariates) add(v);
    return vd;
  }
};

}  // namespace detail

// grid dataset for one condition assignment; focal column filled by caller
inline Dataset effects_base_dataset(const DesignSet& ds, const Dataset& train,
                                    const std::vector<std::string>& vars,
                                    std::size_t rows,
                                    const Dataset* conditions, std::size_t cond_row) {
  Dataset out;
  for (const auto& v : vars) {
    const Column& tc = train.col(v);
    const bool in_cond = conditions && conditions->has(v);
    if (tc.kind == ColKind::Factor) {
      std::string lab = tc.levels[0];  // reference = first level
      if (in_cond) lab = conditions->col(v).label(cond_row);
      out.add_column(v, Column::factor(std::vector<std::string>(rows, lab)));
    } else {
      double val = 0;
      if (in_cond) {
        val = conditions->col(v).as_double(cond_row);
      } else {
        double s = 0;
        for (std::size_t i = 0; i < train.n_rows(); ++i) s += tc.as_double(i);
        val = s / static_cast<double>(train.n_rows());
      }
      if (tc.kind == ColKind::Integer && in_cond) {
        out.add_column(v, Column::integer(std::vector<long long>(
                              rows, static_cast<long long>(val))));
      } else {
        out.add_column(v, Column::numeric(std::vector<double>(rows, val)));
      }
    }
  }
  return out;
}

inline void replace_column(Dataset& d, const std::string& name, Column col) {
  Dataset out;
  for (const auto& n : d.names())
    out.add_column(n, n == name ? col : d.col(n));
  d = std::move(out);
}

inline EffectsGrid effects_grid(const PredictorEngine& eng, const DesignSet& ds,
                                const Dataset& train, const std::string& focal,
                                const Dataset* conditions, int resolution,
                                bool include_groups, bool predictive,
                                std::uint64_t seed, double prob = 0.95) {
  if (!train.has(focal)) throw ValidationError("unknown focal variable '" + focal + "'");
  const detail::VarDefaults vd = detail::VarDefaults::collect(ds.spec);
  const Column& fc = train.col(focal);

  EffectsGrid g;
  g.focal = focal;
  g.focal_is_factor = fc.kind == ColKind::Factor;

  std::vector<double> grid_vals;
  std::vector<std::string> grid_labs;
  if (g.focal_is_factor) {
    grid_labs = fc.levels;
  } else {
    double lo = fc.as_double(0), hi = fc.as_double(0);
    for (std::size_t i = 0; i < train.n_rows(); ++i) {
      lo = std::min(lo, fc.as_double(i));
      hi = std::max(hi, fc.as_double(i));
    }
    if (!(hi > lo)) throw ValidationError("focal variable '" + focal + "' is constant");
    for (int i = 0; i < resolution; ++i)
      grid_vals.push_back(lo + (hi - lo) * i / (resolution - 1));
  }
  const std::size_t rows = g.focal_is_factor ? grid_labs.size() : grid_vals.size();

  const std::size_t n_cond = conditions ? conditions->n_rows() : 1;
  const double alpha = (1.0 - prob) / 2.0;
  for (std::size_t cr = 0; cr < n_cond; ++cr) {
    Dataset nd = effects_base_dataset(ds, train, vd.names, rows, conditions, cr);
    if (g.focal_is_factor)
      replace_column(nd, focal, Column::factor_with_levels(
                                    [&] {
                                      std::vector<int> codes(rows);
                                      for (std::size_t i = 0; i < rows; ++i)
                                        codes[i] = static_cast<int>(i);
                                      return codes;
                                    }(),
                                    fc.levels));
    else
      replace_column(nd, focal, Column::numeric(grid_vals));

    std::string cond_label;
    if (conditions)
      for (const auto& cn : conditions->names()) {
        if (!cond_label.empty()) cond_label += ",";
        cond_label += cn + "=" + conditions->col(cn).label(cr);
      }

    const auto prep = eng.prepare(nd);
    const Eigen::MatrixXd pred = predictive
                                     ? eng.predictive(prep, include_groups, seed)
                                     : eng.expected(prep, include_groups, seed);
    for (std::size_t i = 0; i < rows; ++i) {
      Eigen::VectorXd col = pred.col(static_cast<Eigen::Index>(i));
      std::vector<double> v(col.data(), col.data() + col.size());
      g.condition.push_back(cond_label);
      if (g.focal_is_factor) {
        g.level.push_back(grid_labs[i]);
        g.value.push_back(static_cast<double>(i));
      } else {
        g.value.push_back(grid_vals[i]);
        g.level.push_back("");
      }
      g.estimate.push_back(mean_of(v));
      g.lower.push_back(quantile_type7(v, alpha));
      g.upper.push_back(quantile_type7(v, 1.0 - alpha));
    }
  }
  return g;
}

// spline part only, mean-centered across the grid within each draw
inline EffectsGrid smooth_grid(const PredictorEngine& eng, const DesignSet& ds,
                               const Dataset& train, const std::string& label,
                               int resolution, double prob = 0.95) {
  int oi = -1, si = -1;
  for (std::size_t o = 0; o < ds.owners.size(); ++o)
    for (std::size_t s = 0; s < ds.owners[o].smooths.size(); ++s) {
      const std::string full = ds.owners[o].name == "mu"
                                   ? ds.owners[o].smooths[s].label
                                   : ds.owners[o].name + "_" + ds.owners[o].smooths[s].label;
      if (full == label || ds.owners[o].smooths[s].label == label) {
        oi = static_cast<int>(o);
        si = static_cast<int>(s);
      }
    }
  if (oi < 0) throw ValidationError("no smooth term '" + label + "'");
  const SmoothBlock& sm = ds.owners[static_cast<std::size_t>(oi)].smooths[static_cast<std::size_t>(si)];

  const detail::VarDefaults vd = detail::VarDefaults::collect(ds.spec);
  std::vector<double> grid_vals;
  for (int i = 0; i < resolution; ++i)
    grid_vals.push_back(sm.xmin + (sm.xmax - sm.xmin) * i / (resolution - 1));

  Dataset nd = effects_base_dataset(ds, train, vd.names, grid_vals.size(), nullptr, 0);
  replace_column(nd, sm.var, Column::numeric(grid_vals));
  const auto prep = eng.prepare(nd);
  Eigen::MatrixXd part = eng.smooth_part(static_cast<std::size_t>(oi),
                                         static_cast<std::size_t>(si), prep);
  const Eigen::VectorXd row_means = part.rowwise().mean();
  part.colwise() -= row_means;

  EffectsGrid g;
  g.focal = sm.var;
  const double alpha = (1.0 - prob) / 2.0;
  for (std::size_t i = 0; i < grid_vals.size(); ++i) {
    Eigen::VectorXd col = part.col(static_cast<Eigen::Index>(i));
    std::vector<double> v(col.data(), col.data() + col.size());
    g.condition.push_back("");
    g.value.push_back(grid_vals[i]);
    g.level.push_back("");
    g.estimate.push_back(mean_of(v));
    g.lower.push_back(quantile_type7(v, alpha));
    g.upper.push_back(quantile_type7(v, 1.0 - alpha));
  }
  return g;
}

}  // namespace hierform
