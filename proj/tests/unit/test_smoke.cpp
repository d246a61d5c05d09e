// Header inclusion smoke test: everything compiles together and a tiny model
// evaluates end to end.
#include <catch2/catch_amalgamated.hpp>

#include "hierform/hierform.hpp"
#include "hierform/formula/json.hpp"
#include "hierform/formula/parser.hpp"
#include "hierform/formula/print.hpp"
#include "hierform/math/rng.hpp"
#include "hierform/math/stats.hpp"
#include "hierform/model/json.hpp"
#include "hierform/model/spec.hpp"
#include "hierform/tabular/csv.hpp"
#include "hierform/tabular/simulate.hpp"
#include "hierform/tabular/summary.hpp"

using namespace hierform;
using Catch::Approx;

TEST_CASE("tiny gaussian model evaluates") {
  Dataset d;
  d.add_column("y", Column::numeric({1.0, 2.0, 3.0, 4.0}));
  d.add_column("x", Column::numeric({0.0, 1.0, 0.0, 1.0}));
  auto ast = parse_formula("y ~ x");
  auto spec = build_spec(ast, {}, FamilyId::Gaussian, false, {});
  auto cs = validate(spec, d);
  auto ds = assemble(cs, d);
  auto ps = ParamSpace::build(ds);
  LogPosterior lp(ds, ps);
  REQUIRE(ps.dim() == 3);  // intercept, slope, log sigma
  Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  const double v = lp.value(x);
  REQUIRE(std::isfinite(v));
  Eigen::VectorXd g;
  const double v2 = lp.value_grad(x, g);
  REQUIRE(v2 == Approx(v));
  REQUIRE(g.size() == 3);
}
