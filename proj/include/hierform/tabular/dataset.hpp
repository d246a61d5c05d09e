#pragma once
// Column-oriented in-memory table.  Three column kinds: numeric (double),
// integer (long long), factor (level codes + level-name table, levels ordered
// by first appearance).  Datasets are immutable after construction apart from
// add_column, which validates the new column.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <unordered_map>
#include <vector>

#include "hierform/errors.hpp"

namespace hierform {

enum class ColKind { Numeric, Integer, Factor };

inline const char* col_kind_name(ColKind k) {
  switch (k) {
    case ColKind::Numeric: return "numeric";
    case ColKind::Integer: return "integer";
    case ColKind::Factor: return "factor";
  }
  return "?";
}

struct Column {
  ColKind kind = ColKind::Numeric;
  std::vector<double> num;        // Numeric
  std::vector<long long> ints;    // Integer
  std::vector<int> codes;         // Factor: index into levels
  std::vector<std::string> levels;

  static Column numeric(std::vector<double> v) {
    Column c;
    c.kind = ColKind::Numeric;
    c.num = std::move(v);
    return c;
  }
  static Column integer(std::vector<long long> v) {
    Column c;
    c.kind = ColKind::Integer;
    c.ints = std::move(v);
    return c;
  }
  static Column factor(const std::vector<std::string>& values) {
    Column c;
    c.kind = ColKind::Factor;
    std::unordered_map<std::string, int> seen;
    for (const auto& s : values) {
      auto it = seen.find(s);
      if (it == seen.end()) {
        seen.emplace(s, static_cast<int>(c.levels.size()));
        c.codes.push_back(static_cast<int>(c.levels.size()));
        c.levels.push_back(s);
      } else {
        c.codes.push_back(it->second);
      }
    }
    return c;
  }
  static Column factor_with_levels(std::vector<int> codes, std::vector<std::string> levels) {
    Column c;
    c.kind = ColKind::Factor;
    c.codes = std::move(codes);
    c.levels = std::move(levels);
    return c;
  }

  std::size_t size() const {
    switch (kind) {
      case ColKind::Numeric: return num.size();
      case ColKind::Integer: return ints.size();
      case ColKind::Factor: return codes.size();
    }
    return 0;
  }

  double as_double(std::size_t i) const {
    switch (kind) {
      case ColKind::Numeric: return num[i];
      case ColKind::Integer: return static_cast<double>(ints[i]);
      case ColKind::Factor: return static_cast<double>(codes[i]);
    }
    return 0;
  }

  // string form of entry i (factor level name, or formatted number)
  std::string label(std::size_t i) const {
    switch (kind) {
      case ColKind::Numeric: {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", num[i]);
        return buf;
      }
      case ColKind::Integer: return std::to_string(ints[i]);
      case ColKind::Factor: return levels[codes[i]];
    }
    return "";
  }
};

class Dataset {
 public:
  Dataset() = default;

  void add_column(const std::string& name, Column col) {
    if (name.empty()) throw DataError("column name may not be empty");
    if (index_.count(name)) throw DataError("duplicate column name '" + name + "'");
    if (!cols_.empty() && col.size() != n_rows())
      throw DataError("column '" + name + "' has " + std::to_string(col.size()) +
                      " rows, expected " + std::to_string(n_rows()));
    if (col.kind == ColKind::Numeric) {
      for (std::size_t i = 0; i < col.num.size(); ++i)
        if (!std::isfinite(col.num[i]))
          throw DataError("non-finite value in column '" + name + "' at row " +
                          std::to_string(i + 1));
    }
    if (col.kind == ColKind::Factor) {
      for (int c : col.codes)
        if (c < 0 || c >= static_cast<int>(col.levels.size()))
          throw DataError("factor code out of range in column '" + name + "'");
    }
    index_.emplace(name, static_cast<int>(cols_.size()));
    names_.push_back(name);
    cols_.push_back(std::move(col));
  }

  bool has(const std::string& name) const { return index_.count(name) != 0; }

  const Column& col(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw DataError("no column named '" + name + "'");
    return cols_[static_cast<std::size_t>(it->second)];
  }

  const std::vector<std::string>& names() const { return names_; }
  std::size_t n_cols() const { return cols_.size(); }
  std::size_t n_rows() const { return cols_.empty() ? 0 : cols_[0].size(); }

 private:
  std::vector<std::string> names_;
  std::vector<Column> cols_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace hierform
