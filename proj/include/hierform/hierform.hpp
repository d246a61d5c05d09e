#pragma once
// convenience umbrella: pull in the whole library

#include "hierform/errors.hpp"
#include "hierform/math/rng.hpp"
#include "hierform/math/dual.hpp"
#include "hierform/math/stats.hpp"
#include "hierform/tabular/dataset.hpp"
#include "hierform/tabular/csv.hpp"
#include "hierform/tabular/summary.hpp"
#include "hierform/tabular/simulate.hpp"
#include "hierform/formula/ast.hpp"
#include "hierform/formula/lexer.hpp"
#include "hierform/formula/parser.hpp"
#include "hierform/formula/print.hpp"
#include "hierform/formula/json.hpp"
#include "hierform/model/family.hpp"
#include "hierform/model/prior.hpp"
#include "hierform/model/group_expr.hpp"
#include "hierform/model/spec.hpp"
#include "hierform/model/blocks.hpp"
#include "hierform/model/checked.hpp"
#include "hierform/model/json.hpp"
#include "hierform/design/fixed.hpp"
#include "hierform/design/random.hpp"
#include "hierform/design/smooth.hpp"
#include "hierform/design/design_set.hpp"
#include "hierform/density/nl_program.hpp"
#include "hierform/density/families.hpp"
#include "hierform/density/param_space.hpp"
#include "hierform/density/priors.hpp"
#include "hierform/density/posterior.hpp"
#include "hierform/infer/config.hpp"
#include "hierform/infer/draws.hpp"
#include "hierform/infer/optimize.hpp"
#include "hierform/infer/nuts.hpp"
#include "hierform/infer/diagnostics.hpp"
#include "hierform/infer/summarize.hpp"
#include "hierform/infer/predict.hpp"
#include "hierform/infer/compare.hpp"
#include "hierform/infer/effects.hpp"
#include "hierform/codegen/program.hpp"
