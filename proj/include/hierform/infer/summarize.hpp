#pragma once
// Posterior summary table in the familiar multilevel-regression layout:
// Smooth Terms, Group-Level Effects, Population-Level Effects, Family
// Specific Parameters.  The structure is derived purely from the draw names
// so a table rendered from draws.csv alone is byte-identical to the one the
// fit produced.

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hierform/infer/diagnostics.hpp"
#include "hierform/infer/draws.hpp"
#include "hierform/math/stats.hpp"

namespace hierform {

struct SummaryRow {
  std::string name;  // display name, e.g. "persons", "sd(Intercept)"
  double est = 0, err = 0, l95 = 0, u95 = 0, eff = 0, rhat = 0;
};

struct GroupSection {
  std::string key;  // block key, e.g. "AY" or "mms1s2"
  int n_levels = 0;
  std::vector<SummaryRow> rows;
};

struct SummaryTable {
  std::vector<SummaryRow> smooth;
  std::vector<GroupSection> groups;
  std::vector<SummaryRow> population;
  std::vector<SummaryRow> family;
  double max_rhat = 0;

  const SummaryRow* find(const std::string& display) const {
    for (const auto& r : smooth)
      if (r.name == display) return &r;
    for (const auto& g : groups)
      for (const auto& r : g.rows)
        if (r.name == display) return &r;
    for (const auto& r : population)
      if (r.name == display) return &r;
    for (const auto& r : family)
      if (r.name == display) return &r;
    return nullptr;
  }
};

namespace detail {

inline bool starts_with(const std::string& s, const std::string& p) {
  return s.size() >= p.size() && s.compare(0, p.size(), p) == 0;
}

inline SummaryRow make_row(const Draws& d, int p, const std::string& display) {
  SummaryRow r;
  r.name = display;
  Eigen::VectorXd all = d.stacked(p);
  std::vector<double> v(all.data(), all.data() + all.size());
  r.est = mean_of(v);
  r.err = all.size() > 1 ? sd_of(v) : 0.0;
  r.l95 = quantile_type7(v, 0.025);
  r.u95 = quantile_type7(v, 0.975);
  std::vector<Eigen::VectorXd> per_chain;
  for (const auto& m : d.chains) per_chain.push_back(m.col(p));
  r.eff = ess(per_chain);
  r.rhat = split_rhat(per_chain);
  return r;
}

}  // namespace detail

inline SummaryTable build_summary_table(const Draws& d) {
  SummaryTable t;
  // group sections in order of first appearance of their sd_ parameters
  std::vector<std::string> group_order;
  std::map<std::string, GroupSection> sections;
  std::map<std::string, std::set<std::string>> group_levels;

  for (int p = 0; p < d.n_params(); ++p) {
    const std::string& nm = d.names[static_cast<std::size_t>(p)];
    if (detail::starts_with(nm, "r_")) {
      const std::size_t lb = nm.find('[');
      const std::size_t comma = nm.rfind(',');
      if (lb != std::string::npos && comma != std::string::npos && comma > lb)
        group_levels[nm.substr(2, lb - 2)].insert(nm.substr(lb + 1, comma - lb - 1));
      continue;
    }
    if (detail::starts_with(nm, "s_")) continue;  // spline coordinates
    if (detail::starts_with(nm, "sds_")) {
      t.smooth.push_back(detail::make_row(d, p, "sds(" + nm.substr(4) + ")"));
    } else if (detail::starts_with(nm, "sd_") && nm.find("__") != std::string::npos) {
      const std::size_t sep = nm.find("__");
      const std::string key = nm.substr(3, sep - 3);
      if (!sections.count(key)) group_order.push_back(key);
      sections[key].key = key;
      sections[key].rows.push_back(
          detail::make_row(d, p, "sd(" + nm.substr(sep + 2) + ")"));
    } else if (detail::starts_with(nm, "cor_") && nm.find("__") != std::string::npos) {
      const std::size_t sep = nm.find("__");
      const std::string key = nm.substr(4, sep - 4);
      const std::string rest = nm.substr(sep + 2);
      const std::size_t sep2 = rest.find("__");
      if (!sections.count(key)) group_order.push_back(key);
      sections[key].key = key;
      sections[key].rows.push_back(detail::make_row(
          d, p, sep2 == std::string::npos
                    ? "cor(" + rest + ")"
                    : "cor(" + rest.substr(0, sep2) + "," + rest.substr(sep2 + 2) + ")"));
    } else if (detail::starts_with(nm, "bs_")) {
      t.population.push_back(detail::make_row(d, p, nm.substr(3)));
    } else if (detail::starts_with(nm, "b_")) {
      t.population.push_back(detail::make_row(d, p, nm.substr(2)));
    } else {
      t.family.push_back(detail::make_row(d, p, nm));  // sigma, zi
    }
  }
  for (const auto& key : group_order) {
    GroupSection gs = sections[key];
    gs.n_levels = static_cast<int>(group_levels[key].size());
    t.groups.push_back(std::move(gs));
  }
  t.max_rhat = 0;
  auto scan = [&](const std::vector<SummaryRow>& rows) {
    for (const auto& r : rows)
      if (std::isfinite(r.rhat)) t.max_rhat = std::max(t.max_rhat, r.rhat);
  };
  scan(t.smooth);
  for (const auto& g : t.groups) scan(g.rows);
  scan(t.population);
  scan(t.family);
  return t;
}

struct SummaryHeader {
  std::string family;
  std::string links;                       // "mu = log; zi = logit"
  std::vector<std::string> formula_lines;  // main first, extras after
  std::string data_name;
  int n_obs = 0;
  int chains = 0, iter = 0, warmup = 0, thin = 0;
};

namespace detail {

inline void render_rows(std::ostringstream& os, const std::vector<SummaryRow>& rows) {
  std::size_t w = 0;
  for (const auto& r : rows) w = std::max(w, r.name.size());
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%*s%9s%10s%9s%9s%11s%5s\n", static_cast<int>(w), "",
                "Estimate", "Est.Error", "l-95% CI", "u-95% CI", "Eff.Sample", "Rhat");
  os << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-*s%9.2f%10.2f%9.2f%9.2f%11.0f%5.2f\n",
                  static_cast<int>(w), r.name.c_str(), r.est, r.err, r.l95, r.u95,
                  r.eff, r.rhat);
    os << buf;
  }
}

}  // namespace detail

inline std::string render_summary(const SummaryHeader& h, const Draws& d) {
  const SummaryTable t = build_summary_table(d);
  std::ostringstream os;
  os << " Family: " << h.family << " \n";
  os << "  Links: " << h.links << " \n";
  for (std::size_t i = 0; i < h.formula_lines.size(); ++i)
    os << (i == 0 ? "Formula: " : "         ") << h.formula_lines[i] << " \n";
  os << "   Data: " << h.data_name << " (Number of observations: " << h.n_obs << ") \n";
  os << "Samples: " << h.chains << " chains, each with iter = " << h.iter
     << "; warmup = " << h.warmup << "; thin = " << h.thin << "; \n";
  const int total = h.chains * (h.thin > 0 ? (h.iter - h.warmup) / h.thin : 0);
  os << "         total post-warmup samples = " << total << "\n";

  if (!t.smooth.empty()) {
    os << "\nSmooth Terms: \n";
    detail::render_rows(os, t.smooth);
  }
  if (!t.groups.empty()) {
    os << "\nGroup-Level Effects: \n";
    for (const auto& g : t.groups) {
      os << "~" << g.key << " (Number of levels: " << g.n_levels << ") \n";
      detail::render_rows(os, g.rows);
    }
  }
  if (!t.population.empty()) {
    os << "\nPopulation-Level Effects: \n";
    detail::render_rows(os, t.population);
  }
  if (!t.family.empty()) {
    os << "\nFamily Specific Parameters: \n";
    detail::render_rows(os, t.family);
  }

  os << "\nSamples were drawn using NUTS. For each parameter, Eff.Sample \n"
        "is a crude measure of effective sample size, and Rhat is the potential \n"
        "scale reduction factor on split chains (at convergence, Rhat = 1).\n";
  return os.str();
}

}  // namespace hierform
