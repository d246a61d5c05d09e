// Diagnostics against independently frozen references, MAP against closed
// forms, and the sampler against analytic / quadrature posterior moments.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hierform/density/posterior.hpp"
#include "hierform/formula/parser.hpp"
#include "hierform/infer/diagnostics.hpp"
#include "hierform/infer/draws.hpp"
#include "hierform/infer/nuts.hpp"
#include "hierform/infer/optimize.hpp"
#include "hierform/math/rng.hpp"
#include "hierform/model/spec.hpp"

using namespace hierform;
using Catch::Approx;

namespace {

PriorSpec flat_on(PriorTarget::Kind kind, const std::string& name = "") {
  PriorSpec p;
  p.density = PriorDensity::flat();
  p.target.kind = kind;
  p.target.name = name;
  return p;
}

struct Fitted {
  Dataset data;
  CheckedSpec cs;
  DesignSet ds;
  ParamSpace ps;
};

bool bits_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::equal(a.data(), a.data() + a.size(), b.data());
}

// gaussian y ~ x with flat priors everywhere (sigma keeps its log jacobian)
Fitted flat_gaussian(const std::vector<double>& x, const std::vector<double>& y) {
  Fitted f;
  f.data.add_column("y", Column::numeric(y));
  f.data.add_column("x", Column::numeric(x));
  std::vector<PriorSpec> priors = {flat_on(PriorTarget::Intercept),
                                   flat_on(PriorTarget::FamilyPar, "sigma")};
  auto spec = build_spec(parse_formula("y ~ x"), {}, FamilyId::Gaussian, false, priors);
  f.cs = validate(spec, f.data);
  f.ds = assemble(f.cs, f.data);
  f.ps = ParamSpace::build(f.ds);
  return f;
}

}  // namespace

TEST_CASE("split rhat matches the frozen reference") {
  Eigen::VectorXd c1(8), c2(8);
  c1 << 0.1, 0.3, -0.2, 0.5, 1.1, 0.2, -0.3, 0.4;
  c2 << 1.0, 0.8, 0.6, 1.2, 0.9, 1.1, 0.7, 1.3;
  CHECK(split_rhat({c1, c2}) == Approx(1.38761822981462).epsilon(1e-12));
  Eigen::VectorXd c3(12);
  c3 << 0.4, 0.1, 0.5, -0.2, 0.0, 0.9, 1.3, 0.2, -0.1, 0.6, 0.3, 0.8;
  CHECK(split_rhat({c3}) == Approx(0.9840322958260314).epsilon(1e-12));
}

TEST_CASE("ess matches the frozen reference") {
  Eigen::VectorXd c1(8), c2(8);
  c1 << 0.1, 0.3, -0.2, 0.5, 1.1, 0.2, -0.3, 0.4;
  c2 << 1.0, 0.8, 0.6, 1.2, 0.9, 1.1, 0.7, 1.3;
  CHECK(ess({c1, c2}) == Approx(1.8099954055847673).epsilon(1e-12));
  Eigen::VectorXd c3(12);
  c3 << 0.4, 0.1, 0.5, -0.2, 0.0, 0.9, 1.3, 0.2, -0.1, 0.6, 0.3, 0.8;
  CHECK(ess({c3}) == Approx(15.322683706070299).epsilon(1e-12));
}

TEST_CASE("rhat and ess behave on iid chains") {
  Rng rng(99);
  std::vector<Eigen::VectorXd> chains;
  for (int c = 0; c < 4; ++c) {
    Eigen::VectorXd v(1000);
    for (int i = 0; i < 1000; ++i) v[i] = rng.normal();
    chains.push_back(v);
  }
  const double r = split_rhat(chains);
  CHECK(r >= 0.99);
  CHECK(r <= 1.02);
  const double e = ess(chains);
  CHECK(std::fabs(e - 4000.0) / 4000.0 < 0.20);
}

TEST_CASE("degenerate chains produce the documented sentinels") {
  Eigen::VectorXd a = Eigen::VectorXd::Constant(8, 2.0);
  Eigen::VectorXd b = Eigen::VectorXd::Constant(8, 5.0);
  CHECK(split_rhat({a, b}) > 10.0);  // constant but distinct -> inf sentinel
  CHECK(std::isnan(split_rhat({a, a})));
  CHECK(std::isnan(ess({})));
}

TEST_CASE("map estimate hits closed-form solutions") {
  // poisson y ~ 1 with everything flat: intercept = log(mean y)
  {
    Dataset d;
    d.add_column("y", Column::integer({1, 2, 3}));
    auto spec = build_spec(parse_formula("y ~ 1"), {}, FamilyId::Poisson, false,
                           {flat_on(PriorTarget::Intercept)});
    auto cs = validate(spec, d);
    auto ds = assemble(cs, d);
    auto ps = ParamSpace::build(ds);
    LogPosterior post(ds, ps);
    auto r = map_estimate(post, Eigen::VectorXd::Zero(1));
    REQUIRE(r.converged);
    CHECK(r.x[0] == Approx(std::log(2.0)).epsilon(1e-7));
    Eigen::VectorXd g;
    post.value_grad(r.x, g);
    CHECK(std::fabs(g[0]) < 1e-6);
  }
  // gaussian y ~ x flat: betas = least squares; sigma^2 = RSS/(n-1) because
  // the log-sigma jacobian adds +1 to the stationarity equation
  {
    std::vector<double> x = {-1.0, -0.2, 0.4, 1.1, 2.3, 0.7, 1.9, -0.6};
    std::vector<double> y = {0.3, -0.4, 1.2, 0.8, 2.0, 0.9, 1.4, 0.1};
    Fitted f = flat_gaussian(x, y);
    LogPosterior post(f.ds, f.ps);
    auto r = map_estimate(post, Eigen::VectorXd::Zero(3));
    REQUIRE(r.converged);
    const Eigen::MatrixXd& X = f.ds.owners[0].fixed.X;
    Eigen::VectorXd yv(8);
    for (int i = 0; i < 8; ++i) yv[i] = y[static_cast<std::size_t>(i)];
    Eigen::VectorXd beta = (X.transpose() * X).ldlt().solve(X.transpose() * yv);
    CHECK(r.x[0] == Approx(beta[0]).margin(1e-6));
    CHECK(r.x[1] == Approx(beta[1]).margin(1e-6));
    const double rss = (yv - X * beta).squaredNorm();
    CHECK(std::exp(2.0 * r.x[2]) == Approx(rss / 7.0).epsilon(1e-5));
  }
}

TEST_CASE("sampler recovers the analytic intercept posterior", "[sampler]") {
  // y ~ 1, flat priors: mu | y is student-t(n-2, ybar, sqrt(A/(n(n-2))))
  // with A = sum (y - ybar)^2, so E[mu] = ybar and V[mu] = A/(n(n-4))
  std::vector<double> y = {1.2, 0.4, -0.3, 2.1, 1.7, 0.9, -0.8, 1.1, 0.6, 1.4,
                           0.2, 1.9, 0.8, -0.1, 1.3, 0.5, 1.0, 1.6, 0.0, 0.7};
  const int n = static_cast<int>(y.size());
  double ybar = 0;
  for (double v : y) ybar += v;
  ybar /= n;
  double A = 0;
  for (double v : y) A += (v - ybar) * (v - ybar);
  const double true_var = A / (n * (n - 4.0));

  Dataset d;
  d.add_column("y", Column::numeric(y));
  auto spec = build_spec(parse_formula("y ~ 1"), {}, FamilyId::Gaussian, false,
                         {flat_on(PriorTarget::Intercept), flat_on(PriorTarget::FamilyPar, "sigma")});
  auto cs = validate(spec, d);
  auto ds = assemble(cs, d);
  auto ps = ParamSpace::build(ds);
  LogPosterior post(ds, ps);

  for (std::uint64_t seed : {11u, 23u, 37u, 51u, 64u}) {
    SamplerConfig cfg;
    cfg.chains = 4;
    cfg.iter = 1000;
    cfg.warmup = 500;
    cfg.seed = seed;
    Draws dr = nuts_sample(post, cfg);
    const Eigen::VectorXd mu = dr.stacked(dr.param_index("b_Intercept"));
    const double m = mu.mean();
    const double v = (mu.array() - m).square().sum() / (mu.size() - 1);
    // 3 x MC standard error, with a conservative effective-sample deflation
    const double mcse = std::sqrt(true_var / (mu.size() / 4.0));
    INFO("seed " << seed << " mean " << m << " target " << ybar);
    CHECK(std::fabs(m - ybar) < 3.0 * mcse);
    CHECK(std::fabs(v - true_var) / true_var < 0.25);
  }
}

TEST_CASE("sampler matches quadrature moments on a correlated posterior", "[sampler]") {
  // x values centered far from zero make intercept and slope strongly
  // anti-correlated; reference moments come from dense 3-d quadrature of the
  // same log posterior, so this isolates sampler error
  std::vector<double> x = {0.62, 1.37, 0.88, 1.11, 0.74, 1.52, 0.95, 1.28,
                           0.81, 1.05, 1.44, 0.69, 1.19, 0.92, 1.33, 0.57};
  std::vector<double> y = {0.90, 1.64, 1.10, 1.42, 0.86, 1.81, 1.21, 1.57,
                           0.99, 1.32, 1.70, 0.85, 1.46, 1.18, 1.62, 0.71};
  Fitted f = flat_gaussian(x, y);
  LogPosterior post(f.ds, f.ps);

  // dense trapezoid-style quadrature over (b0, b1, log sigma)
  const int G = 64;
  const double b0_lo = -0.6, b0_hi = 1.0;
  const double b1_lo = 0.2, b1_hi = 1.6;
  const double ls_lo = -4.5, ls_hi = -0.5;
  double Z = 0, m0 = 0, m1 = 0, s00 = 0, s01 = 0, s11 = 0;
  Eigen::VectorXd th(3);
  double lpmax = -1e300;
  std::vector<double> lps(static_cast<std::size_t>(G * G * G));
  int at = 0;
  for (int i = 0; i < G; ++i)
    for (int j = 0; j < G; ++j)
      for (int k = 0; k < G; ++k) {
        th[0] = b0_lo + (i + 0.5) * (b0_hi - b0_lo) / G;
        th[1] = b1_lo + (j + 0.5) * (b1_hi - b1_lo) / G;
        th[2] = ls_lo + (k + 0.5) * (ls_hi - ls_lo) / G;
        const double lp = post.value(th);
        lps[static_cast<std::size_t>(at++)] = lp;
        lpmax = std::max(lpmax, lp);
      }
  at = 0;
  for (int i = 0; i < G; ++i)
    for (int j = 0; j < G; ++j)
      for (int k = 0; k < G; ++k) {
        const double w = std::exp(lps[static_cast<std::size_t>(at++)] - lpmax);
        const double b0 = b0_lo + (i + 0.5) * (b0_hi - b0_lo) / G;
        const double b1 = b1_lo + (j + 0.5) * (b1_hi - b1_lo) / G;
        Z += w;
        m0 += w * b0;
        m1 += w * b1;
        s00 += w * b0 * b0;
        s01 += w * b0 * b1;
        s11 += w * b1 * b1;
      }
  m0 /= Z; m1 /= Z;
  const double v00 = s00 / Z - m0 * m0;
  const double v01 = s01 / Z - m0 * m1;
  const double v11 = s11 / Z - m1 * m1;
  const double rho = v01 / std::sqrt(v00 * v11);
  REQUIRE(rho < -0.85);  // the fixture really is strongly correlated

  SamplerConfig cfg;
  cfg.chains = 4;
  cfg.iter = 1500;
  cfg.warmup = 750;
  cfg.seed = 2024;
  Draws dr = nuts_sample(post, cfg);
  const Eigen::VectorXd b0 = dr.stacked(dr.param_index("b_Intercept"));
  const Eigen::VectorXd b1 = dr.stacked(dr.param_index("b_x"));
  const double sm0 = b0.mean(), sm1 = b1.mean();
  const double sv00 = (b0.array() - sm0).square().mean();
  const double sv11 = (b1.array() - sm1).square().mean();
  const double sv01 = ((b0.array() - sm0) * (b1.array() - sm1)).mean();
  CHECK(std::fabs(sm0 - m0) < 4.0 * std::sqrt(v00 / 300.0));
  CHECK(std::fabs(sm1 - m1) < 4.0 * std::sqrt(v11 / 300.0));
  CHECK(std::fabs(sv00 - v00) / v00 < 0.10);
  CHECK(std::fabs(sv11 - v11) / v11 < 0.10);
  CHECK(std::fabs(sv01 - v01) / std::fabs(v01) < 0.10);
}

TEST_CASE("sampling is deterministic for a fixed seed and merge order", "[sampler]") {
  std::vector<double> x = {-1.0, -0.2, 0.4, 1.1, 2.3, 0.7};
  std::vector<double> y = {0.3, -0.4, 1.2, 0.8, 2.0, 0.9};
  Fitted f = flat_gaussian(x, y);
  LogPosterior post(f.ds, f.ps);
  SamplerConfig cfg;
  cfg.chains = 2;
  cfg.iter = 300;
  cfg.warmup = 150;
  cfg.seed = 77;
  Draws a = nuts_sample(post, cfg);
  Draws b = nuts_sample(post, cfg);
  cfg.cores = 2;
  Draws c = nuts_sample(post, cfg);
  REQUIRE(a.n_chains() == 2);
  for (int ch = 0; ch < 2; ++ch) {
    CHECK(bits_equal(a.chains[static_cast<std::size_t>(ch)], b.chains[static_cast<std::size_t>(ch)]));
    CHECK(bits_equal(a.chains[static_cast<std::size_t>(ch)], c.chains[static_cast<std::size_t>(ch)]));
  }
  CHECK(a.step_size == b.step_size);
  CHECK(a.step_size == c.step_size);

  cfg.cores = 1;
  cfg.seed = 78;
  Draws e = nuts_sample(post, cfg);
  CHECK(!bits_equal(a.chains[0], e.chains[0]));  // the seed actually matters
}

TEST_CASE("draws csv round trip preserves every bit") {
  Draws d;
  d.names = {"b_Intercept", "sigma"};
  Eigen::MatrixXd c1(3, 2), c2(3, 2);
  c1 << 0.1234567890123456, 1.1, -2.5e-17, 0.9, 3.14159265358979, 1.000000000000001;
  c2 << -0.5, 2.0, 1e300, 1e-300, 0.0, 7.5;
  d.chains = {c1, c2};
  d.divergent = {{0, 0, 1}, {0, 0, 0}};
  d.treedepth_hit = {{0, 0, 0}, {1, 0, 0}};
  d.step_size = {0.5, 0.25};

  const auto path = (std::filesystem::temp_directory_path() / "hierform_draws_rt.csv").string();
  {
    std::ofstream os(path);
    write_draws_csv(os, d);
  }
  Draws r = read_draws_csv(path);
  std::filesystem::remove(path);
  REQUIRE(r.names == d.names);
  REQUIRE(r.n_chains() == 2);
  REQUIRE(r.n_kept() == 3);
  CHECK(bits_equal(r.chains[0], c1));
  CHECK(bits_equal(r.chains[1], c2));
}

TEST_CASE("raising adapt_delta reduces divergences on a funnel", "[sampler]") {
  // near-degenerate residuals leave sigma spanning decades, so the intercept's
  // conditional scale e^zeta forms a funnel; the non-centered group effects
  // elsewhere never reproduce this geometry, but the residual scale does
  Dataset d;
  d.add_column("y", Column::numeric({0.0, 0.001, -0.001, 0.0005}));
  auto spec = build_spec(parse_formula("y ~ 1"), {}, FamilyId::Gaussian, false, {});
  auto cs = validate(spec, d);
  auto ds = assemble(cs, d);
  auto ps = ParamSpace::build(ds);
  LogPosterior post(ds, ps);

  int div_low = 0, div_high = 0;
  for (std::uint64_t seed : {3u, 14u, 26u, 41u, 58u}) {
    SamplerConfig cfg;
    cfg.chains = 1;
    cfg.iter = 400;
    cfg.warmup = 200;
    cfg.seed = seed;
    cfg.adapt_delta = 0.8;
    div_low += nuts_sample(post, cfg).divergence_count();
    cfg.adapt_delta = 0.95;
    div_high += nuts_sample(post, cfg).divergence_count();
  }
  INFO("divergences: adapt_delta 0.8 -> " << div_low << ", 0.95 -> " << div_high);
  CHECK(div_low > 0);  // the fixture really does strain the sampler
  CHECK(div_high < div_low);
}
