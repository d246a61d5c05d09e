#pragma once
#include <algorithm>
#include <string>
#include <vector>

#include "hierform/tabular/dataset.hpp"

namespace hierform {

struct ColumnSummary {
  ColKind kind;
  // numeric / integer
  double mean = 0, min = 0, max = 0;
  // factor
  std::vector<std::string> levels;
  std::vector<std::size_t> level_counts;
  std::string modal_level;
  std::string reference_level;  // first appearing level: baseline in designs
};

inline ColumnSummary column_summary(const Dataset& d, const std::string& name) {
  const Column& c = d.col(name);
  ColumnSummary s;
  s.kind = c.kind;
  const std::size_t n = c.size();
  if (c.kind == ColKind::Factor) {
    s.levels = c.levels;
    s.level_counts.assign(c.levels.size(), 0);
    for (int code : c.codes) s.level_counts[static_cast<std::size_t>(code)]++;
    if (!c.levels.empty()) {
      s.reference_level = c.levels.front();
      std::size_t best = 0;
      for (std::size_t i = 1; i < s.level_counts.size(); ++i)
        if (s.level_counts[i] > s.level_counts[best]) best = i;  // ties: first level wins
      s.modal_level = c.levels[best];
    }
    return s;
  }
  if (n == 0) return s;
  double lo = c.as_double(0), hi = lo, sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = c.as_double(i);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  s.mean = sum / static_cast<double>(n);
  s.min = lo;
  s.max = hi;
  return s;
}

}  // namespace hierform
