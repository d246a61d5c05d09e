#pragma once
// Simulator for the weighted multi-membership demo: students belong to one
// school, except an initial block of "changers" who split membership 50/50
// between two distinct schools.

#include <cmath>
#include <string>
#include <vector>

#include "hierform/errors.hpp"
#include "hierform/math/rng.hpp"
#include "hierform/tabular/dataset.hpp"

namespace hierform {

struct MultiMemTruth {
  double intercept = 20.0;
  double sd_school = 3.0;
  double sigma = 3.5;
};

struct MultiMemSim {
  Dataset data;                        // s1, s2, w1, w2, y; changers first
  std::vector<double> school_effects;  // the latent u_s actually used
};

inline MultiMemSim sim_multi_mem(int nschools, int nstudents, double change,
                                 const MultiMemTruth& truth, std::uint64_t seed) {
  if (nschools < 2) throw DataError("sim_multi_mem: need at least 2 schools");
  if (nstudents < 1) throw DataError("sim_multi_mem: need at least 1 student");
  if (!(change >= 0.0 && change <= 1.0))
    throw DataError("sim_multi_mem: change must lie in [0, 1]");
  if (!(truth.sd_school >= 0.0) || !(truth.sigma > 0.0) || !std::isfinite(truth.intercept))
    throw DataError("sim_multi_mem: invalid truth parameters");

  Rng rng(seed);
  const int S = nschools, N = nstudents;
  const int n_change = static_cast<int>(std::llround(change * N));

  std::vector<double> u(static_cast<std::size_t>(S));
  for (auto& v : u) v = rng.normal(0.0, truth.sd_school);

  std::vector<int> s1(static_cast<std::size_t>(N)), s2(static_cast<std::size_t>(N));
  for (int i = 0; i < n_change; ++i) {
    int a = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(S)));
    int b = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(S - 1)));
    if (b >= a) ++b;  // distinct pair, uniform over ordered pairs
    s1[static_cast<std::size_t>(i)] = a;
    s2[static_cast<std::size_t>(i)] = b;
  }
  for (int i = n_change; i < N; ++i) {
    int a = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(S)));
    s1[static_cast<std::size_t>(i)] = a;
    s2[static_cast<std::size_t>(i)] = a;
  }

  std::vector<double> y(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double eff = 0.5 * u[static_cast<std::size_t>(s1[k])] +
                       0.5 * u[static_cast<std::size_t>(s2[k])];
    y[k] = truth.intercept + eff + rng.normal(0.0, truth.sigma);
  }

  std::vector<std::string> levels(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s) levels[static_cast<std::size_t>(s)] = std::to_string(s + 1);

  MultiMemSim out;
  out.school_effects = u;
  out.data.add_column("s1", Column::factor_with_levels(s1, levels));
  out.data.add_column("s2", Column::factor_with_levels(s2, levels));
  out.data.add_column("w1", Column::numeric(std::vector<double>(static_cast<std::size_t>(N), 0.5)));
  out.data.add_column("w2", Column::numeric(std::vector<double>(static_cast<std::size_t>(N), 0.5)));
  out.data.add_column("y", Column::numeric(std::move(y)));
  return out;
}

// replace the 50/50 changer weights with random splits w1 ~ U(0,1), w2 = 1-w1
inline void randomize_changer_weights(Dataset& d, int n_change, std::uint64_t seed) {
  auto w1 = d.col("w1").num;
  auto w2 = d.col("w2").num;
  Rng rng(derive_seed(seed, 9001));
  for (int i = 0; i < n_change && i < static_cast<int>(w1.size()); ++i) {
    const double w = rng.uniform();
    w1[static_cast<std::size_t>(i)] = w;
    w2[static_cast<std::size_t>(i)] = 1.0 - w;
  }
  Dataset out;
  out.add_column("s1", d.col("s1"));
  out.add_column("s2", d.col("s2"));
  out.add_column("w1", Column::numeric(std::move(w1)));
  out.add_column("w2", Column::numeric(std::move(w2)));
  out.add_column("y", d.col("y"));
  d = std::move(out);
}

}  // namespace hierform
