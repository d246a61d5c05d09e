#pragma once
// RFC-4180 CSV reader/writer with type inference.
//
// Inference per column, over all rows: integer if every field parses as a
// whole number, else numeric if every field parses as a finite double, else
// factor (levels in first-appearance order).  Missing fields (empty or "NA")
// are rejected with row/column coordinates -- modelling code downstream
// assumes complete data.

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hierform/tabular/dataset.hpp"

namespace hierform {

using CsvSchema = std::map<std::string, ColKind>;

namespace detail {

// split one logical CSV record starting at position `pos`; handles quoted
// fields with embedded commas/newlines and doubled quotes
inline bool next_record(const std::string& text, std::size_t& pos,
                        std::vector<std::string>& fields, std::size_t& line_no) {
  fields.clear();
  if (pos >= text.size()) return false;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  while (pos < text.size()) {
    char c = text[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field += '"';
          pos += 2;
        } else {
          in_quotes = false;
          ++pos;
        }
      } else {
        if (c == '\n') ++line_no;
        field += c;
        ++pos;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      any = true;
      ++pos;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
      any = true;
      ++pos;
    } else if (c == '\r') {
      ++pos;  // swallow; CRLF handled by the \n branch
    } else if (c == '\n') {
      ++pos;
      ++line_no;
      break;
    } else {
      field += c;
      any = true;
      ++pos;
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field at line " + std::to_string(line_no));
  if (!any && fields.empty() && field.empty()) return false;  // trailing blank line
  fields.push_back(field);
  return true;
}

inline bool parse_ll(const std::string& s, long long& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) return false;
  out = v;
  return true;
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  if (!std::isfinite(v)) return false;
  out = v;
  return true;
}

}  // namespace detail

inline Dataset read_csv_string(const std::string& text, const CsvSchema& schema = {}) {
  std::size_t pos = 0, line_no = 1;
  std::vector<std::string> header;
  if (!detail::next_record(text, pos, header, line_no))
    throw DataError("empty CSV input: no header row");
  for (auto& h : header)
    if (h.empty()) throw DataError("empty column name in CSV header");

  std::vector<std::vector<std::string>> raw(header.size());
  std::vector<std::string> fields;
  std::size_t row = 0;
  while (detail::next_record(text, pos, fields, line_no)) {
    ++row;
    if (fields.size() != header.size())
      throw DataError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(header.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (fields[c].empty() || fields[c] == "NA")
        throw DataError("missing value at row " + std::to_string(row) + ", column '" +
                        header[c] + "'");
      raw[c].push_back(fields[c]);
    }
  }

  Dataset d;
  for (std::size_t c = 0; c < header.size(); ++c) {
    std::optional<ColKind> forced;
    if (auto it = schema.find(header[c]); it != schema.end()) forced = it->second;

    ColKind kind;
    if (forced) {
      kind = *forced;
    } else if (raw[c].empty()) {
      kind = ColKind::Numeric;  // header-only input: default type
    } else {
      bool all_int = true, all_num = true;
      long long llv;
      double dv;
      for (const auto& s : raw[c]) {
        if (all_int && !detail::parse_ll(s, llv)) all_int = false;
        if (!all_int && all_num && !detail::parse_double(s, dv)) {
          all_num = false;
          break;
        }
      }
      kind = all_int ? ColKind::Integer : (all_num ? ColKind::Numeric : ColKind::Factor);
    }

    switch (kind) {
      case ColKind::Integer: {
        std::vector<long long> v(raw[c].size());
        for (std::size_t i = 0; i < raw[c].size(); ++i) {
          if (!detail::parse_ll(raw[c][i], v[i]))
            throw DataError("column '" + header[c] + "' row " + std::to_string(i + 1) +
                            ": '" + raw[c][i] + "' is not an integer");
        }
        d.add_column(header[c], Column::integer(std::move(v)));
        break;
      }
      case ColKind::Numeric: {
        std::vector<double> v(raw[c].size());
        for (std::size_t i = 0; i < raw[c].size(); ++i) {
          if (!detail::parse_double(raw[c][i], v[i]))
            throw DataError("column '" + header[c] + "' row " + std::to_string(i + 1) +
                            ": '" + raw[c][i] + "' is not numeric");
        }
        d.add_column(header[c], Column::numeric(std::move(v)));
        break;
      }
      case ColKind::Factor:
        d.add_column(header[c], Column::factor(raw[c]));
        break;
    }
  }
  return d;
}

inline Dataset read_csv(const std::string& path, const CsvSchema& schema = {}) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return read_csv_string(ss.str(), schema);
}

namespace detail {
inline std::string csv_escape(const std::string& s) {
  bool need = s.find_first_of(",\"\n\r") != std::string::npos;
  if (!need) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}
}  // namespace detail

inline void write_csv(std::ostream& os, const Dataset& d) {
  const auto& names = d.names();
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (c) os << ',';
    os << detail::csv_escape(names[c]);
  }
  os << '\n';
  char buf[40];
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (c) os << ',';
      const Column& col = d.col(names[c]);
      switch (col.kind) {
        case ColKind::Numeric:
          std::snprintf(buf, sizeof(buf), "%.17g", col.num[i]);
          os << buf;
          break;
        case ColKind::Integer:
          os << col.ints[i];
          break;
        case ColKind::Factor:
          os << detail::csv_escape(col.levels[static_cast<std::size_t>(col.codes[i])]);
          break;
      }
    }
    os << '\n';
  }
}

inline void write_csv(const std::string& path, const Dataset& d) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path + "' for writing");
  write_csv(f, d);
}

}  // namespace hierform
