#pragma once
// Posterior draws on the constrained scale, plus the CSV round trip used by
// fit bundles (columns: chain, iteration, then parameter names).

#include <Eigen/Dense>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hierform/errors.hpp"
#include "hierform/tabular/csv.hpp"

namespace hierform {

struct Draws {
  std::vector<std::string> names;            // constrained parameter names
  std::vector<Eigen::MatrixXd> chains;       // per chain: kept x params
  std::vector<std::vector<unsigned char>> divergent;      // per chain, per kept draw
  std::vector<std::vector<unsigned char>> treedepth_hit;  // per chain, per kept draw
  std::vector<double> step_size;             // per chain (post-adaptation)
  std::vector<Eigen::VectorXd> inv_metric;   // per chain, diagonal

  int n_chains() const { return static_cast<int>(chains.size()); }
  int n_kept() const { return chains.empty() ? 0 : static_cast<int>(chains[0].rows()); }
  int n_params() const { return static_cast<int>(names.size()); }
  int total_draws() const { return n_chains() * n_kept(); }

  int param_index(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    return -1;
  }

  // all chains stacked (chain-major) for one parameter
  Eigen::VectorXd stacked(int p) const {
    Eigen::VectorXd out(total_draws());
    int at = 0;
    for (const auto& m : chains) {
      out.segment(at, m.rows()) = m.col(p);
      at += static_cast<int>(m.rows());
    }
    return out;
  }

  // draws x params with chains stacked chain-major (row s = chain s/n_kept)
  Eigen::MatrixXd stacked_all() const {
    Eigen::MatrixXd out(total_draws(), n_params());
    int at = 0;
    for (const auto& m : chains) {
      out.middleRows(at, m.rows()) = m;
      at += static_cast<int>(m.rows());
    }
    return out;
  }

  int divergence_count() const {
    int c = 0;
    for (const auto& d : divergent)
      for (unsigned char f : d) c += f != 0;
    return c;
  }
  int treedepth_count() const {
    int c = 0;
    for (const auto& d : treedepth_hit)
      for (unsigned char f : d) c += f != 0;
    return c;
  }
};

inline void write_draws_csv(std::ostream& os, const Draws& d) {
  os << "chain,iteration";
  for (const auto& n : d.names) os << ',' << detail::csv_escape(n);
  os << '\n';
  char buf[40];
  for (int c = 0; c < d.n_chains(); ++c) {
    const Eigen::MatrixXd& m = d.chains[static_cast<std::size_t>(c)];
    for (Eigen::Index it = 0; it < m.rows(); ++it) {
      os << (c + 1) << ',' << (it + 1);
      for (Eigen::Index p = 0; p < m.cols(); ++p) {
        std::snprintf(buf, sizeof(buf), "%.17g", m(it, p));
        os << ',' << buf;
      }
      os << '\n';
    }
  }
}

inline Draws read_draws_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  Draws d;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::vector<std::string> rec;
  if (!detail::next_record(text, pos, rec, line_no) || rec.size() < 3 ||
      rec[0] != "chain" || rec[1] != "iteration")
    throw DataError("'" + path + "': expected header starting with chain,iteration");
  d.names.assign(rec.begin() + 2, rec.end());
  const std::size_t P = d.names.size();

  std::vector<std::vector<double>> rows;  // chain id then values
  std::vector<int> chain_ids;
  while (detail::next_record(text, pos, rec, line_no)) {
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (rec.size() != P + 2)
      throw DataError("'" + path + "': row has " + std::to_string(rec.size()) +
                      " fields, expected " + std::to_string(P + 2));
    chain_ids.push_back(std::stoi(rec[0]));
    std::vector<double> vals(P);
    for (std::size_t i = 0; i < P; ++i) vals[i] = std::stod(rec[2 + i]);
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw DataError("'" + path + "': no draws");
  int n_chains = 0;
  for (int c : chain_ids) n_chains = std::max(n_chains, c);
  std::vector<int> counts(static_cast<std::size_t>(n_chains), 0);
  for (int c : chain_ids) ++counts[static_cast<std::size_t>(c - 1)];
  for (int c = 0; c < n_chains; ++c)
    if (counts[static_cast<std::size_t>(c)] == 0 ||
        counts[static_cast<std::size_t>(c)] != counts[0])
      throw DataError("'" + path + "': chains have unequal draw counts");
  d.chains.assign(static_cast<std::size_t>(n_chains),
                  Eigen::MatrixXd(counts[0], static_cast<Eigen::Index>(P)));
  std::vector<int> fill(static_cast<std::size_t>(n_chains), 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int c = chain_ids[r] - 1;
    const int it = fill[static_cast<std::size_t>(c)]++;
    for (std::size_t i = 0; i < P; ++i)
      d.chains[static_cast<std::size_t>(c)](it, static_cast<Eigen::Index>(i)) = rows[r][i];
  }
  return d;
}

inline void write_draws_csv(const std::string& path, const Draws& d) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write '" + path + "'");
  write_draws_csv(os, d);
}

}  // namespace hierform
