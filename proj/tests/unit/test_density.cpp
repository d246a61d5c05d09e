// Density layer: family pmf/pdf values against scipy, composed log posteriors
// against independently assembled references, and gradients against central
// finite differences for every family/link/block combination.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hierform/density/families.hpp"
#include "hierform/density/posterior.hpp"
#include "hierform/density/priors.hpp"
#include "hierform/formula/parser.hpp"
#include "hierform/math/rng.hpp"
#include "hierform/model/spec.hpp"

using namespace hierform;
using Catch::Approx;

namespace {

PriorSpec prior_of(PriorDensity dens, PriorTarget::Kind kind, const std::string& name = "",
                   const std::string& group = "") {
  PriorSpec p;
  p.density = dens;
  p.target.kind = kind;
  p.target.name = name;
  p.target.group = group;
  return p;
}

struct Built {
  Dataset data;
  CheckedSpec cs;
  DesignSet ds;
  ParamSpace ps;
};

Built build(const std::string& formula, FamilyId fam, Dataset data,
            std::vector<PriorSpec> priors = {},
            std::vector<FormulaAst> extras = {}, bool nonlinear = false) {
  Built b;
  b.data = std::move(data);
  auto spec = build_spec(parse_formula(formula), std::move(extras), fam, nonlinear,
                         std::move(priors));
  b.cs = validate(spec, b.data);
  b.ds = assemble(b.cs, b.data);
  b.ps = ParamSpace::build(b.ds);
  return b;
}

const std::vector<double> kXA = {-1.0, -0.2, 0.4, 1.1, 2.3};
const std::vector<double> kYA = {0.3, -0.4, 1.2, 0.8, 2.0};

Dataset data_A() {
  Dataset d;
  d.add_column("y", Column::numeric(kYA));
  d.add_column("x", Column::numeric(kXA));
  return d;
}

// max relative gradient error against central finite differences
double max_fd_error(const LogPosterior& post, const Eigen::VectorXd& x) {
  Eigen::VectorXd g;
  const double base = post.value_grad(x, g);
  REQUIRE(std::isfinite(base));
  double worst = 0;
  const double h = 1e-6;
  Eigen::VectorXd xp = x, xm = x;
  for (int i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    const double fd = (post.value(xp) - post.value(xm)) / (2 * h);
    xp[i] = x[i];
    xm[i] = x[i];
    const double denom = std::max(1.0, std::fabs(g[i]));
    worst = std::max(worst, std::fabs(fd - g[i]) / denom);
  }
  return worst;
}

void check_gradients(const Built& b, Rng& rng, int points = 20, double scale = 0.8) {
  LogPosterior post(b.ds, b.ps);
  for (int p = 0; p < points; ++p) {
    Eigen::VectorXd x(post.dim());
    for (int i = 0; i < x.size(); ++i) x[i] = scale * (2.0 * rng.uniform() - 1.0);
    INFO("point " << p);
    CHECK(max_fd_error(post, x) < 1e-6);
  }
}

}  // namespace

TEST_CASE("family log densities match scipy values") {
  // gaussian on the eta scale (log sigma argument)
  CHECK(gaussian_eta_lp(1.3, 0.4, std::log(2.5)) ==
        Approx(-1.9000292650788277).epsilon(1e-14));
  CHECK(poisson_eta_lp(7LL, std::log(3.2)) == Approx(-3.583105692425648).epsilon(1e-14));
  CHECK(zip_log_pmf(0, 2.0, 0.41) == Approx(-0.7136605134439351).epsilon(1e-14));
  CHECK(zip_log_pmf(3, 1.7, 0.25) == Approx(-2.1875567884933247).epsilon(1e-14));
  CHECK(zip_log_pmf(5, 4.4, 0.0) == Approx(-1.7794690381609684).epsilon(1e-14));
  CHECK(zip_log_pmf(0, 0.0, 0.5) == 0.0);  // degenerate poisson at zero
  CHECK(poisson_log_pmf(0, 0.0) == 0.0);
}

TEST_CASE("prior densities match scipy values") {
  CHECK(prior_logpdf(PriorDensity::normal(0.4, 2.5), 1.3) ==
        Approx(-1.9000292650788277).epsilon(1e-14));
  const auto t3 = PriorDensity::student_t(3, 0, 10);
  CHECK(prior_logpdf(t3, 0.0) == Approx(-3.303473942617556).epsilon(1e-14));
  CHECK(prior_logpdf(t3, 3.7) == Approx(-3.3927194675021077).epsilon(1e-14));
  CHECK(prior_logpdf(t3, -15.0) == Approx(-4.422705518488401).epsilon(1e-14));
  const auto ht3 = PriorDensity::half_student_t(3, 10);
  CHECK(prior_logpdf(ht3, 0.5) == Approx(-2.611992734665394).epsilon(1e-14));
  CHECK(prior_logpdf(ht3, 12.0) == Approx(-3.394410937609658).epsilon(1e-14));
  CHECK(prior_logpdf(PriorDensity::flat(), 123.0) == 0.0);
  CHECK(prior_logpdf(PriorDensity::uniform_prob(), 0.25) == 0.0);
}

TEST_CASE("lkj cholesky density matches the reference sum") {
  // cholesky of [[1,.3,.1],[.3,1,-.4],[.1,-.4,1]], row-major
  const double L[9] = {1.0, 0.0, 0.0,
                       0.3, 0.9539392014169457, 0.0,
                       0.1, -0.4507624797904249, 0.8870249076622295};
  CHECK(lkj_cholesky_lpdf(L, 3, 1.0) == Approx(-0.04715533973562065).epsilon(1e-12));
  CHECK(lkj_cholesky_lpdf(L, 3, 1.5) == Approx(-0.21419289574636635).epsilon(1e-12));
  CHECK(lkj_cholesky_lpdf(L, 3, 2.0) == Approx(-0.3812304517571121).epsilon(1e-12));
}

TEST_CASE("zip pmf normalizes and collapses to poisson at zi=0") {
  for (double lam : {0.1, 1.0, 5.0, 20.0})
    for (double zi : {0.0, 0.3, 0.9}) {
      const long long ymax = static_cast<long long>(lam + 40 * std::sqrt(lam) + 50);
      double total = 0;
      for (long long yy = 0; yy <= ymax; ++yy) total += std::exp(zip_log_pmf(yy, lam, zi));
      CHECK(total >= 1.0 - 1e-10);
      CHECK(total <= 1.0 + 1e-10);
    }
  for (long long yy : {0LL, 1LL, 4LL, 11LL})
    CHECK(zip_log_pmf(yy, 3.7, 0.0) ==
          Approx(poisson_log_pmf(yy, 3.7)).epsilon(1e-12));
}

TEST_CASE("composed log posterior: gaussian with flat and default priors") {
  Eigen::VectorXd th1(3), th2(3);
  th1 << 0.25, 0.60, std::log(0.8);
  th2 << -0.10, 1.00, 0.35;

  Built flat = build("y ~ x", FamilyId::Gaussian, data_A(),
                     {prior_of(PriorDensity::flat(), PriorTarget::Intercept),
                      prior_of(PriorDensity::flat(), PriorTarget::FamilyPar, "sigma")});
  LogPosterior lp_flat(flat.ds, flat.ps);
  CHECK(lp_flat.value(th1) == Approx(-4.761884085766525).epsilon(1e-12));
  CHECK(lp_flat.value(th2) == Approx(-6.704809650445078).epsilon(1e-12));

  Built def = build("y ~ x", FamilyId::Gaussian, data_A());
  LogPosterior lp_def(def.ds, def.ps);
  CHECK(lp_def.value(th1) == Approx(-10.680363535729514).epsilon(1e-12));
  CHECK(lp_def.value(th2) == Approx(-12.632057181572362).epsilon(1e-12));
}

TEST_CASE("composed log posterior: observation weights scale the likelihood only") {
  Dataset d = data_A();
  d.add_column("w", Column::numeric({1.0, 2.0, 0.5, 1.5, 3.0}));
  Built b = build("y | weights(w) ~ x", FamilyId::Gaussian, std::move(d),
                  {prior_of(PriorDensity::flat(), PriorTarget::Intercept),
                   prior_of(PriorDensity::flat(), PriorTarget::FamilyPar, "sigma")});
  LogPosterior lp(b.ds, b.ps);
  Eigen::VectorXd th(3);
  th << 0.25, 0.60, std::log(0.8);
  CHECK(lp.value(th) == Approx(-7.090440906437913).epsilon(1e-12));
}

TEST_CASE("composed log posterior: zero-inflated poisson with logit jacobian") {
  Dataset d;
  d.add_column("y", Column::integer({0, 1, 3, 0, 0, 2}));
  d.add_column("x", Column::numeric({-0.5, 0.3, 1.0, 1.6, -1.2, 0.0}));
  Eigen::VectorXd th(3);
  th << 0.2, 0.7, -0.4;

  Built flat = build("y ~ x", FamilyId::ZeroInflatedPoisson, d,
                     {prior_of(PriorDensity::flat(), PriorTarget::Intercept)});
  LogPosterior lp_flat(flat.ds, flat.ps);
  CHECK(lp_flat.value(th) == Approx(-8.711527382117284).epsilon(1e-12));

  Built def = build("y ~ x", FamilyId::ZeroInflatedPoisson, d);
  LogPosterior lp_def(def.ds, def.ps);
  CHECK(lp_def.value(th) == Approx(-12.015267973625308).epsilon(1e-12));
}

TEST_CASE("composed log posterior: intercept-only group effects") {
  Dataset d;
  d.add_column("y", Column::numeric({1.0, 1.4, -0.3, 0.2, 2.1, 1.7}));
  d.add_column("g", Column::factor({"a", "a", "b", "b", "c", "c"}));
  Eigen::VectorXd th(6);
  th << 0.5, 0.3, -0.8, 1.1, -0.5, -0.1;

  std::vector<PriorSpec> flat_priors = {
      prior_of(PriorDensity::flat(), PriorTarget::Intercept),
      prior_of(PriorDensity::flat(), PriorTarget::Sd, "", "g"),
      prior_of(PriorDensity::flat(), PriorTarget::FamilyPar, "sigma")};
  Built flat = build("y ~ (1 | g)", FamilyId::Gaussian, d, flat_priors);
  REQUIRE(flat.ps.dim() == 6);
  LogPosterior lp_flat(flat.ds, flat.ps);
  CHECK(lp_flat.value(th) == Approx(-10.403322167517231).epsilon(1e-12));

  Built def = build("y ~ (1 | g)", FamilyId::Gaussian, d);
  LogPosterior lp_def(def.ds, def.ps);
  CHECK(lp_def.value(th) == Approx(-18.937017404511653).epsilon(1e-12));
}

TEST_CASE("composed log posterior: correlated slope and intercept effects") {
  Dataset d;
  d.add_column("y", Column::numeric({0.6, -0.2, 1.5, 0.9, 1.8}));
  d.add_column("x", Column::numeric(kXA));
  d.add_column("g", Column::factor({"a", "b", "a", "b", "a"}));
  Built b = build("y ~ x + (1 + x | g)", FamilyId::Gaussian, d,
                  {prior_of(PriorDensity::flat(), PriorTarget::Intercept),
                   prior_of(PriorDensity::flat(), PriorTarget::Sd, "", "g"),
                   prior_of(PriorDensity::flat(), PriorTarget::FamilyPar, "sigma")});
  REQUIRE(b.ps.dim() == 10);
  LogPosterior lp(b.ds, b.ps);
  Eigen::VectorXd th(10);
  th << 0.2, -0.3, 0.5, -0.2, 0.1, 0.9, -0.3, -0.6, 0.7, 0.1;
  CHECK(lp.value(th) == Approx(-12.437236408386251).epsilon(1e-12));
}

TEST_CASE("identity correlation and unit scales leave effects unchanged") {
  Dataset d;
  d.add_column("y", Column::numeric({0.6, -0.2, 1.5, 0.9, 1.8}));
  d.add_column("x", Column::numeric(kXA));
  d.add_column("g", Column::factor({"a", "b", "a", "b", "a"}));
  Built b = build("y ~ x + (1 + x | g)", FamilyId::Gaussian, d);
  Eigen::VectorXd th = Eigen::VectorXd::Zero(b.ps.dim());
  // z entries nonzero, log sd = 0 (sd = 1), correlation parameter 0 (L = I)
  th[2] = 0.7; th[3] = -1.2; th[4] = 0.25; th[5] = 2.0;
  const Eigen::VectorXd c = b.ps.constrain(th);
  const auto& names = b.ps.constrained_names();
  auto at = [&](const std::string& n) {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == n) return c[static_cast<Eigen::Index>(i)];
    FAIL("missing name " << n);
    return 0.0;
  };
  CHECK(at("r_g[a,Intercept]") == Approx(0.7).epsilon(1e-15));
  CHECK(at("r_g[a,x]") == Approx(-1.2).epsilon(1e-15));
  CHECK(at("r_g[b,Intercept]") == Approx(0.25).epsilon(1e-15));
  CHECK(at("r_g[b,x]") == Approx(2.0).epsilon(1e-15));
  CHECK(at("cor_g__Intercept__x") == Approx(0.0).margin(1e-15));
}

TEST_CASE("log posterior is invariant under observation reordering") {
  Rng rng(31);
  const int n = 24;
  std::vector<double> x(n), y(n);
  std::vector<std::string> g(n);
  for (int i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] = rng.normal();
    y[static_cast<std::size_t>(i)] = rng.normal();
    g[static_cast<std::size_t>(i)] = std::string(1, static_cast<char>('a' + i % 3));
  }
  auto make = [&](const std::vector<int>& order) {
    Dataset d;
    std::vector<double> xs, ys;
    std::vector<std::string> gs;
    for (int i : order) {
      xs.push_back(x[static_cast<std::size_t>(i)]);
      ys.push_back(y[static_cast<std::size_t>(i)]);
      gs.push_back(g[static_cast<std::size_t>(i)]);
    }
    d.add_column("y", Column::numeric(ys));
    d.add_column("x", Column::numeric(xs));
    d.add_column("g", Column::factor(gs));
    return build("y ~ x + (1 | g)", FamilyId::Gaussian, std::move(d));
  };
  std::vector<int> id(n), perm(n);
  for (int i = 0; i < n; ++i) id[static_cast<std::size_t>(i)] = i;
  perm = id;
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[3], perm[11]);
  Built b1 = make(id), b2 = make(perm);
  LogPosterior p1(b1.ds, b1.ps), p2(b2.ds, b2.ps);
  REQUIRE(b1.ps.dim() == b2.ps.dim());
  Rng rp(7);
  for (int t = 0; t < 5; ++t) {
    Eigen::VectorXd th(b1.ps.dim());
    for (int i = 0; i < th.size(); ++i) th[i] = rp.normal() * 0.5;
    CHECK(p1.value(th) == Approx(p2.value(th)).margin(1e-9));
  }
}

TEST_CASE("gradients match finite differences across model types") {
  Rng rng(1234);
  SECTION("gaussian, flat priors") {
    check_gradients(build("y ~ x", FamilyId::Gaussian, data_A(),
                          {prior_of(PriorDensity::flat(), PriorTarget::Intercept),
                           prior_of(PriorDensity::flat(), PriorTarget::FamilyPar, "sigma")}),
                    rng);
  }
  SECTION("gaussian, default priors") {
    check_gradients(build("y ~ x", FamilyId::Gaussian, data_A()), rng);
  }
  SECTION("gaussian without intercept") {
    check_gradients(build("y ~ 0 + x", FamilyId::Gaussian, data_A()), rng);
  }
  SECTION("gaussian with modeled sigma") {
    check_gradients(build("y ~ x", FamilyId::Gaussian, data_A(), {},
                          {parse_formula("sigma ~ x")}),
                    rng);
  }
  SECTION("gaussian with weights") {
    Dataset d = data_A();
    d.add_column("w", Column::numeric({1.0, 2.0, 0.5, 1.5, 3.0}));
    check_gradients(build("y | weights(w) ~ x", FamilyId::Gaussian, std::move(d)), rng);
  }

  Dataset dg;
  dg.add_column("y", Column::numeric({0.6, -0.2, 1.5, 0.9, 1.8, 0.3, 1.1, -0.4}));
  dg.add_column("x", Column::numeric({-1.0, -0.2, 0.4, 1.1, 2.3, 0.0, 0.9, -1.5}));
  dg.add_column("g", Column::factor({"a", "b", "a", "b", "c", "c", "a", "b"}));
  dg.add_column("h", Column::factor({"u", "u", "v", "v", "u", "v", "u", "v"}));
  SECTION("gaussian, intercept effects") {
    check_gradients(build("y ~ x + (1 | g)", FamilyId::Gaussian, dg), rng);
  }
  SECTION("gaussian, correlated effects") {
    check_gradients(build("y ~ x + (1 + x | g)", FamilyId::Gaussian, dg), rng);
  }
  SECTION("gaussian, uncorrelated effects") {
    check_gradients(build("y ~ x + (1 + x || g)", FamilyId::Gaussian, dg), rng);
  }
  SECTION("gaussian, nested grouping") {
    check_gradients(build("y ~ x + (1 | g/h)", FamilyId::Gaussian, dg), rng);
  }
  SECTION("gaussian, smooth term") {
    Dataset d;
    std::vector<double> xs, ys;
    Rng gen(8);
    for (int i = 0; i < 30; ++i) {
      xs.push_back(i * 0.2);
      ys.push_back(std::sin(i * 0.2) + 0.1 * gen.normal());
    }
    d.add_column("y", Column::numeric(ys));
    d.add_column("x", Column::numeric(xs));
    check_gradients(build("y ~ s(x, k = 6)", FamilyId::Gaussian, std::move(d)), rng, 10);
  }

  Dataset dp;
  dp.add_column("y", Column::integer({0, 1, 3, 0, 2, 5, 1, 0}));
  dp.add_column("x", Column::numeric({-1.0, -0.2, 0.4, 1.1, 2.3, 0.0, 0.9, -1.5}));
  dp.add_column("g", Column::factor({"a", "b", "a", "b", "c", "c", "a", "b"}));
  SECTION("poisson") {
    check_gradients(build("y ~ x", FamilyId::Poisson, dp), rng);
  }
  SECTION("poisson, intercept effects") {
    check_gradients(build("y ~ x + (1 | g)", FamilyId::Poisson, dp), rng);
  }
  SECTION("zero-inflated poisson") {
    check_gradients(build("y ~ x", FamilyId::ZeroInflatedPoisson, dp), rng);
  }
  SECTION("zero-inflated poisson with modeled zi") {
    check_gradients(build("y ~ x", FamilyId::ZeroInflatedPoisson, dp, {},
                          {parse_formula("zi ~ x")}),
                    rng);
  }
  SECTION("multi-membership effects") {
    Dataset d;
    d.add_column("y", Column::numeric({0.6, -0.2, 1.5, 0.9, 1.8, 0.3}));
    d.add_column("g1", Column::factor({"a", "b", "c", "a", "b", "c"}));
    d.add_column("g2", Column::factor({"b", "c", "a", "c", "a", "b"}));
    d.add_column("w1", Column::numeric({0.5, 0.7, 1.0, 0.2, 0.9, 0.4}));
    d.add_column("w2", Column::numeric({0.5, 0.3, 1.0, 0.8, 0.1, 0.6}));
    check_gradients(
        build("y ~ (1 | mm(g1, g2, weights = cbind(w1, w2)))", FamilyId::Gaussian, std::move(d)),
        rng);
  }
  SECTION("non-linear growth curve") {
    Dataset d;
    d.add_column("y", Column::numeric({10.0, 35.0, 60.0, 80.0, 95.0, 99.0}));
    d.add_column("dev", Column::numeric({6.0, 18.0, 30.0, 42.0, 54.0, 66.0}));
    std::vector<PriorSpec> priors;
    {
      PriorSpec p;
      p.density = PriorDensity::normal(100, 30);
      p.target.kind = PriorTarget::CoefClass;
      p.target.owner = "ult";
      priors.push_back(p);
      p.density = PriorDensity::normal(1, 2);
      p.target.owner = "omega";
      priors.push_back(p);
      p.density = PriorDensity::normal(45, 10);
      p.target.owner = "theta";
      priors.push_back(p);
    }
    Built b;
    b.data = std::move(d);
    auto spec = build_spec(parse_nl_formula("y ~ ult * (1 - exp(-(dev / theta) ^ omega))"),
                           {parse_formula("ult ~ 1"), parse_formula("omega ~ 1"),
                            parse_formula("theta ~ 1")},
                           FamilyId::Gaussian, true, priors);
    b.cs = validate(spec, b.data);
    b.ds = assemble(b.cs, b.data);
    b.ps = ParamSpace::build(b.ds);
    // keep the curve parameters in a sane region: ult ~ 100, omega ~ 1, theta ~ 45
    LogPosterior post(b.ds, b.ps);
    Rng local(77);
    for (int p = 0; p < 10; ++p) {
      Eigen::VectorXd th(post.dim());
      th << 100.0 + 5.0 * local.normal(), 1.0 + 0.1 * local.normal(),
          45.0 + 2.0 * local.normal(), 1.0 + 0.2 * local.normal();
      CHECK(max_fd_error(post, th) < 1e-6);
    }
  }
}

TEST_CASE("non-linear evaluation hits the growth curve identities") {
  // at dev == theta the curve passes through ult * (1 - exp(-1))
  Dataset d;
  d.add_column("y", Column::numeric({3300.0}));
  d.add_column("dev", Column::numeric({46.07}));
  auto spec = build_spec(parse_nl_formula("y ~ ult * (1 - exp(-(dev / theta) ^ omega))"),
                         {parse_formula("ult ~ 1"), parse_formula("omega ~ 1"),
                          parse_formula("theta ~ 1")},
                         FamilyId::Gaussian, true,
                         {prior_of(PriorDensity::flat(), PriorTarget::FamilyPar, "sigma")});
  auto cs = validate(spec, d);
  auto ds = assemble(cs, d);
  REQUIRE(ds.spec.nl_params.size() == 3);
  double cov = 46.07;
  std::vector<double> pars(3);
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string& nm = ds.spec.nl_params[i];
    pars[i] = nm == "ult" ? 5273.70 : nm == "omega" ? 1.34 : 46.07;
  }
  NlEvalStatus st;
  std::vector<double> stack(static_cast<std::size_t>(std::max(ds.nl_prog.max_depth, 1)));
  const double eta = ds.nl_prog.eval(&cov, pars.data(), stack.data(), st);
  REQUIRE(st.ok);
  CHECK(eta == Approx(3333.6141910941647).epsilon(1e-12));
}

TEST_CASE("non-linear evaluation at the published posterior means") {
  Dataset d;
  d.add_column("y", Column::numeric({300.0}));
  d.add_column("dev", Column::numeric({6.0}));
  auto spec = build_spec(parse_nl_formula("y ~ ult * (1 - exp(-(dev / theta) ^ omega))"),
                         {parse_formula("ult ~ 1"), parse_formula("omega ~ 1"),
                          parse_formula("theta ~ 1")},
                         FamilyId::Gaussian, true, {});
  auto cs = validate(spec, d);
  auto ds = assemble(cs, d);
  double cov = 6.0;
  std::vector<double> pars(3);
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string& nm = ds.spec.nl_params[i];
    pars[i] = nm == "ult" ? 5273.70 : nm == "omega" ? 1.34 : 46.07;
  }
  NlEvalStatus st;
  std::vector<double> stack(static_cast<std::size_t>(std::max(ds.nl_prog.max_depth, 1)));
  const double eta = ds.nl_prog.eval(&cov, pars.data(), stack.data(), st);
  REQUIRE(st.ok);
  CHECK(eta == Approx(332.5009568796579).epsilon(1e-12));
}

TEST_CASE("negative base with fractional exponent is a domain error") {
  Dataset d;
  d.add_column("y", Column::numeric({1.0}));
  d.add_column("dev", Column::numeric({-3.0}));  // negative covariate
  auto spec = build_spec(parse_nl_formula("y ~ ult * (1 - exp(-(dev / theta) ^ omega))"),
                         {parse_formula("ult ~ 1"), parse_formula("omega ~ 1"),
                          parse_formula("theta ~ 1")},
                         FamilyId::Gaussian, true, {});
  auto cs = validate(spec, d);
  auto ds = assemble(cs, d);
  auto ps = ParamSpace::build(ds);
  LogPosterior post(ds, ps);
  Eigen::VectorXd th(4);
  th << 100.0, 1.34, 46.07, 0.0;  // (dev/theta) < 0 with fractional omega
  CHECK(post.value(th) == -std::numeric_limits<double>::infinity());
  Eigen::VectorXd g;
  CHECK(post.value_grad(th, g) == -std::numeric_limits<double>::infinity());
  CHECK(g.norm() == 0.0);
}
