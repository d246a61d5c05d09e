// hierform: multilevel regression with extended formula syntax.
// Subcommands: parse, fit, summary, compare, effects, codegen, design-dump,
// logdensity, simulate-mm.  Exit codes: 0 ok, 1 usage, 2 parse error,
// 3 validation/data error, 4 sampler failure, 5 not converged.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hierform/cli/driver.hpp"
#include "hierform/infer/effects.hpp"
#include "hierform/tabular/simulate.hpp"
#include "hierform/tabular/summary.hpp"

namespace hf = hierform;

namespace {

std::string basename_no_ext(const std::string& path) {
  std::filesystem::path p(path);
  return p.stem().string();
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("HIERFORM_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') return static_cast<std::uint64_t>(v);
    std::cerr << "warning: ignoring non-numeric HIERFORM_SEED\n";
  }
  return 0;
}

struct ModelFlags {
  std::string formula, model_file;
  std::vector<std::string> extras, priors;
  std::string family = "gaussian";
  bool nonlinear = false;

  void attach(CLI::App* app, bool with_priors = true) {
    app->add_option("--formula", formula, "model formula, e.g. \"y ~ x + (1|g)\"");
    app->add_option("--model-file", model_file,
                    "file with the formula plus 'name: formula' parameter lines");
    app->add_option("--extra", extras,
                    "parameter formula \"name=rhs\" (repeatable)");
    app->add_option("--family", family, "gaussian | poisson | zero_inflated_poisson");
    app->add_flag("--nl", nonlinear, "treat the main formula as non-linear");
    if (with_priors)
      app->add_option("--prior", priors,
                      "prior, e.g. \"normal(5000,1000),nlpar=ult\" (repeatable)");
  }

  hf::ModelInputs inputs() const {
    hf::ModelInputs mi;
    if (!model_file.empty()) {
      const hf::ModelFileSpec mf = hf::parse_model_file(hf::read_text_file(model_file));
      mi.formula = mf.main;
      mi.extras = mf.extras;
      for (const auto& e : extras) mi.extras.push_back(e);
    } else {
      if (formula.empty())
        throw hf::ValidationError("either --formula or --model-file is required");
      mi.formula = formula;
      mi.extras = extras;
    }
    mi.family = family;
    mi.nonlinear = nonlinear;
    mi.priors = priors;
    return mi;
  }
};

struct SamplerFlags {
  hf::SamplerConfig cfg;

  void attach(CLI::App* app) {
    cfg.seed = default_seed();
    app->add_option("--chains", cfg.chains, "number of chains");
    app->add_option("--iter", cfg.iter, "iterations per chain (incl. warmup)");
    app->add_option("--warmup", cfg.warmup, "warmup iterations per chain");
    app->add_option("--thin", cfg.thin, "keep every thin-th draw");
    app->add_option("--adapt-delta", cfg.adapt_delta, "target acceptance statistic");
    app->add_option("--max-treedepth", cfg.max_treedepth, "NUTS tree depth cap");
    app->add_option("--seed", cfg.seed, "RNG seed (default $HIERFORM_SEED or 0)");
    app->add_option("--cores", cfg.cores, "chains run in parallel");
    app->add_option("--init-range", cfg.init_range, "uniform(-r, r) unconstrained inits");
  }
};

void write_out(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    hf::atomic_write_file(out, text);
}

std::string effects_csv(const hf::EffectsGrid& g) {
  std::ostringstream os;
  os << g.focal << ",estimate,lower95,upper95,condition\n";
  char buf[40];
  for (std::size_t i = 0; i < g.estimate.size(); ++i) {
    if (g.focal_is_factor)
      os << hf::detail::csv_escape(g.level[i]);
    else {
      std::snprintf(buf, sizeof(buf), "%.10g", g.value[i]);
      os << buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.10g", g.estimate[i]);
    os << buf;
    std::snprintf(buf, sizeof(buf), ",%.10g", g.lower[i]);
    os << buf;
    std::snprintf(buf, sizeof(buf), ",%.10g", g.upper[i]);
    os << buf;
    os << "," << hf::detail::csv_escape(g.condition[i]) << "\n";
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multilevel regression with extended formula syntax"};
  app.require_subcommand(1);

  // ---- parse ----
  auto* c_parse = app.add_subcommand("parse", "parse a formula and print its structure as JSON");
  ModelFlags parse_model;
  parse_model.attach(c_parse);
  bool parse_resolve = false;
  std::string parse_out;
  c_parse->add_flag("--resolve", parse_resolve, "also expand and print group-effect blocks");
  c_parse->add_option("--out", parse_out, "output file (default stdout)");

  // ---- fit ----
  auto* c_fit = app.add_subcommand("fit", "fit a model and write a bundle directory");
  ModelFlags fit_model;
  SamplerFlags fit_sampler;
  fit_model.attach(c_fit);
  fit_sampler.attach(c_fit);
  std::string fit_data, fit_out;
  bool fit_no_loglik = false, fit_allow_nonconverged = false, fit_quiet = false;
  c_fit->add_option("--data", fit_data, "training data CSV")->required();
  c_fit->add_option("--out", fit_out, "bundle directory")->required();
  c_fit->add_flag("--no-loglik", fit_no_loglik, "skip the pointwise log-likelihood file");
  c_fit->add_flag("--allow-nonconverged", fit_allow_nonconverged,
                  "exit 0 even when some Rhat exceeds 1.1");
  c_fit->add_flag("--quiet", fit_quiet, "do not print the summary");

  // ---- summary ----
  auto* c_summary = app.add_subcommand("summary", "recompute and print a bundle's summary");
  std::string summary_bundle;
  c_summary->add_option("bundle", summary_bundle, "bundle directory")->required();

  // ---- compare ----
  auto* c_compare = app.add_subcommand("compare", "information-criterion comparison of two fits");
  std::string cmp_a, cmp_b, cmp_method = "loo";
  c_compare->add_option("bundleA", cmp_a, "first bundle")->required();
  c_compare->add_option("bundleB", cmp_b, "second bundle")->required();
  c_compare->add_option("--method", cmp_method, "loo (default) or waic");

  // ---- effects ----
  auto* c_effects = app.add_subcommand("effects", "marginal-effects grid as CSV");
  std::string eff_bundle, eff_focal, eff_conditions, eff_out, eff_data;
  bool eff_smooth_only = false, eff_predictive = false, eff_include_groups = false;
  int eff_resolution = 100;
  std::uint64_t eff_seed = default_seed();
  c_effects->add_option("bundle", eff_bundle, "bundle directory")->required();
  c_effects->add_option("--focal", eff_focal, "focal variable (or smooth label)")->required();
  c_effects->add_option("--conditions", eff_conditions, "CSV of condition rows");
  c_effects->add_option("--data", eff_data, "override the training data path");
  c_effects->add_option("--out", eff_out, "output file (default stdout)");
  c_effects->add_option("--resolution", eff_resolution, "grid points for numeric focal");
  c_effects->add_flag("--smooth-only", eff_smooth_only, "centered spline part only");
  c_effects->add_flag("--predictive", eff_predictive, "posterior predictive, not expected value");
  c_effects->add_flag("--include-groups", eff_include_groups, "keep group-level effects");
  c_effects->add_option("--seed", eff_seed, "seed for sampling/unseen levels");

  // ---- codegen ----
  auto* c_codegen = app.add_subcommand("codegen", "emit the model as Stan-flavored program text");
  ModelFlags cg_model;
  cg_model.attach(c_codegen);
  std::string cg_data, cg_out;
  c_codegen->add_option("--data", cg_data, "data CSV the design is built against")->required();
  c_codegen->add_option("--out", cg_out, "output file (default stdout)");

  // ---- design-dump ----
  auto* c_design = app.add_subcommand("design-dump", "print design-matrix structure as JSON");
  ModelFlags dd_model;
  dd_model.attach(c_design);
  std::string dd_data, dd_out;
  bool dd_matrices = false;
  c_design->add_option("--data", dd_data, "data CSV")->required();
  c_design->add_option("--out", dd_out, "output file (default stdout)");
  c_design->add_flag("--matrices", dd_matrices, "include full matrix values");

  // ---- logdensity ----
  auto* c_logdens = app.add_subcommand("logdensity", "evaluate the log-posterior and gradient");
  ModelFlags ld_model;
  ld_model.attach(c_logdens);
  std::string ld_data, ld_theta;
  c_logdens->add_option("--data", ld_data, "data CSV")->required();
  c_logdens->add_option("--theta", ld_theta, "comma-separated unconstrained values (default 0)");

  // ---- simulate-mm ----
  auto* c_sim = app.add_subcommand("simulate-mm", "simulate the multi-membership school data");
  int sim_nschools = 10, sim_nstudents = 1000;
  double sim_change = 0.1;
  std::uint64_t sim_seed = default_seed();
  std::string sim_out;
  c_sim->add_option("--nschools", sim_nschools, "number of schools");
  c_sim->add_option("--nstudents", sim_nstudents, "number of students");
  c_sim->add_option("--change", sim_change, "fraction changing schools");
  c_sim->add_option("--seed", sim_seed, "RNG seed");
  c_sim->add_option("--out", sim_out, "output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    // ---------------- parse ----------------
    if (*c_parse) {
      const hf::ModelInputs mi = parse_model.inputs();
      hf::FormulaAst main =
          mi.nonlinear ? hf::parse_nl_formula(mi.formula) : hf::parse_formula(mi.formula);
      hf::Json out;
      out["formula"] = hf::to_json(main);
      out["extras"] = hf::Json::array();
      std::vector<hf::FormulaAst> extra_asts;
      for (const auto& e : mi.extras) {
        extra_asts.push_back(hf::parse_extra_formula(e));
        out["extras"].push_back(hf::to_json(extra_asts.back()));
      }
      if (parse_resolve) {
        hf::FormulaAst main2 = main;
        if (!main2.has_response) {
          main2.has_response = true;
          main2.response.variables = {".y"};
        }
        const hf::ModelSpec spec =
            hf::build_spec(std::move(main2), extra_asts, hf::parse_family(mi.family),
                           mi.nonlinear, {});
        out["blocks"] = hf::Json::array();
        for (const auto& b : hf::resolve_blocks(spec)) out["blocks"].push_back(hf::to_json(b));
      }
      write_out(parse_out, out.dump(2) + "\n");
      return hf::kExitOk;
    }

    // ---------------- fit ----------------
    if (*c_fit) {
      const hf::ModelInputs mi = fit_model.inputs();
      fit_sampler.cfg.check();
      auto fit = hf::run_fit(mi, hf::read_csv(fit_data), basename_no_ext(fit_data),
                             fit_sampler.cfg);
      hf::save_bundle(fit_out, *fit, fit_data, !fit_no_loglik);
      if (!fit_quiet) std::cout << fit->summary_text;

      const hf::SummaryTable st = hf::build_summary_table(fit->draws);
      const int ndiv = fit->total_divergences();
      if (ndiv > 0)
        std::cerr << "Warning: " << ndiv
                  << " divergent transitions after warmup. Consider raising adapt_delta.\n";
      if (fit->total_treedepth_hits() > 0)
        std::cerr << "Warning: " << fit->total_treedepth_hits()
                  << " transitions hit the maximum tree depth.\n";
      if (st.max_rhat > 1.1) {
        std::cerr << "Warning: largest Rhat is " << st.max_rhat
                  << "; the chains have not mixed.\n";
        if (!fit_allow_nonconverged) return hf::kExitNonconverged;
      }
      return hf::kExitOk;
    }

    // ---------------- summary ----------------
    if (*c_summary) {
      const hf::LoadedBundle b = hf::load_bundle(summary_bundle);
      hf::SummaryHeader h;
      {
        // rebuild the header from the stored config; the draws file carries
        // everything else
        const hf::ModelSpec spec = hf::make_model_spec(b.inputs);
        const hf::FamilyInfo fam = hf::family_info(spec.family);
        h.family = fam.name;
        h.links = "mu = ";
        h.links += hf::link_name(fam.mu_link);
        for (std::size_t k = 0; k < fam.extra_dpars.size(); ++k)
          h.links += std::string("; ") + fam.extra_dpars[k] + " = " +
                     hf::link_name(fam.extra_links[k]);
        h.formula_lines.push_back(spec.main.raw_text);
        for (const auto& e : spec.extras) h.formula_lines.push_back(e.ast.raw_text);
        h.data_name = b.data_name;
        h.n_obs = b.n_obs;
        h.chains = b.cfg.chains;
        h.iter = b.cfg.iter;
        h.warmup = b.cfg.warmup;
        h.thin = b.cfg.thin;
      }
      std::cout << hf::render_summary(h, b.draws);
      return hf::kExitOk;
    }

    // ---------------- compare ----------------
    if (*c_compare) {
      if (cmp_method != "loo" && cmp_method != "waic")
        throw hf::ValidationError("--method must be loo or waic");
      const hf::LoadedBundle a = hf::load_bundle(cmp_a);
      const hf::LoadedBundle b = hf::load_bundle(cmp_b);
      const Eigen::MatrixXd ll_a = hf::bundle_loglik(a);
      const Eigen::MatrixXd ll_b = hf::bundle_loglik(b);
      const bool loo = cmp_method == "loo";
      const hf::IcResult ra = loo ? hf::psis_loo(ll_a) : hf::waic(ll_a);
      const hf::IcResult rb = loo ? hf::psis_loo(ll_b) : hf::waic(ll_b);
      const hf::IcDiff d = hf::ic_diff(ra, rb);
      std::cout << hf::render_compare_table(basename_no_ext(cmp_a), ra,
                                            basename_no_ext(cmp_b), rb, d, loo);
      if (loo && (ra.n_high_k > 0 || rb.n_high_k > 0))
        std::cerr << "Warning: " << ra.n_high_k + rb.n_high_k
                  << " observations with Pareto k > 0.7; LOO may be unreliable.\n";
      return hf::kExitOk;
    }

    // ---------------- effects ----------------
    if (*c_effects) {
      const hf::LoadedBundle b = hf::load_bundle(eff_bundle);
      const std::string data_path = eff_data.empty() ? b.data_path : eff_data;
      auto fit = hf::rebuild_fit(b.inputs, hf::read_csv(data_path), b.data_name, b.cfg, b.draws);
      hf::PredictorEngine eng(fit->ds, fit->ps, fit->draws);
      hf::EffectsGrid grid;
      if (eff_smooth_only) {
        grid = hf::smooth_grid(eng, fit->ds, fit->data, eff_focal, eff_resolution);
      } else {
        hf::Dataset conditions;
        const bool has_cond = !eff_conditions.empty();
        if (has_cond) conditions = hf::read_csv(eff_conditions);
        grid = hf::effects_grid(eng, fit->ds, fit->data, eff_focal,
                                has_cond ? &conditions : nullptr, eff_resolution,
                                eff_include_groups, eff_predictive, eff_seed);
      }
      write_out(eff_out, effects_csv(grid));
      return hf::kExitOk;
    }

    // ---------------- codegen ----------------
    if (*c_codegen) {
      const hf::ModelInputs mi = cg_model.inputs();
      const hf::Dataset data = hf::read_csv(cg_data);
      const hf::ModelSpec spec = hf::make_model_spec(mi);
      const hf::CheckedSpec cs = hf::validate(spec, data);
      const hf::DesignSet ds = hf::assemble(cs, data);
      const hf::ParamSpace ps = hf::ParamSpace::build(ds);
      write_out(cg_out, hf::emit_program_text(ds, ps));
      return hf::kExitOk;
    }

    // ---------------- design-dump ----------------
    if (*c_design) {
      const hf::ModelInputs mi = dd_model.inputs();
      const hf::Dataset data = hf::read_csv(dd_data);
      const hf::ModelSpec spec = hf::make_model_spec(mi);
      const hf::CheckedSpec cs = hf::validate(spec, data);
      const hf::DesignSet ds = hf::assemble(cs, data);
      const hf::ParamSpace ps = hf::ParamSpace::build(ds);
      hf::Json out;
      out["n"] = static_cast<int>(ds.n);
      out["dim_unconstrained"] = ps.dim();
      out["owners"] = hf::Json::array();
      for (const auto& od : ds.owners) {
        hf::Json oj;
        oj["name"] = od.name;
        oj["fixed_columns"] = od.fixed.col_names;
        if (dd_matrices) {
          oj["X"] = hf::Json::array();
          for (Eigen::Index i = 0; i < od.fixed.X.rows(); ++i) {
            hf::Json row = hf::Json::array();
            for (Eigen::Index j = 0; j < od.fixed.X.cols(); ++j) row.push_back(od.fixed.X(i, j));
            oj["X"].push_back(row);
          }
        }
        oj["smooths"] = hf::Json::array();
        for (const auto& sm : od.smooths) {
          hf::Json sj;
          sj["label"] = sm.label;
          sj["var"] = sm.var;
          sj["k"] = sm.k;
          sj["penalized_cols"] = static_cast<int>(sm.Zs.cols());
          oj["smooths"].push_back(sj);
        }
        out["owners"].push_back(oj);
      }
      out["blocks"] = hf::Json::array();
      for (std::size_t bi = 0; bi < ds.rblocks.size(); ++bi) {
        const hf::RandomBlock& rb = ds.rblocks[bi];
        hf::Json bj;
        bj["key"] = ps.block_keys()[bi];
        bj["label"] = rb.label;
        bj["levels"] = rb.levels;
        bj["coefficients"] = rb.coef_names;
        bj["correlated"] = rb.correlated;
        if (dd_matrices) {
          const Eigen::MatrixXd Z = rb.dense(ds.n);
          bj["Z"] = hf::Json::array();
          for (Eigen::Index i = 0; i < Z.rows(); ++i) {
            hf::Json row = hf::Json::array();
            for (Eigen::Index j = 0; j < Z.cols(); ++j) row.push_back(Z(i, j));
            bj["Z"].push_back(row);
          }
        }
        out["blocks"].push_back(bj);
      }
      out["parameters"] = hf::Json::array();
      for (const auto& seg : ps.segments()) {
        hf::Json sj;
        sj["name"] = seg.name;
        sj["size"] = seg.size;
        out["parameters"].push_back(sj);
      }
      write_out(dd_out, out.dump(2) + "\n");
      return hf::kExitOk;
    }

    // ---------------- logdensity ----------------
    if (*c_logdens) {
      const hf::ModelInputs mi = ld_model.inputs();
      const hf::Dataset data = hf::read_csv(ld_data);
      const hf::ModelSpec spec = hf::make_model_spec(mi);
      const hf::CheckedSpec cs = hf::validate(spec, data);
      const hf::DesignSet ds = hf::assemble(cs, data);
      const hf::ParamSpace ps = hf::ParamSpace::build(ds);
      const hf::LogPosterior post(ds, ps);
      Eigen::VectorXd theta = Eigen::VectorXd::Zero(post.dim());
      if (!ld_theta.empty()) {
        const auto parts = hf::detail::split_outside_parens(ld_theta, ',');
        if (static_cast<int>(parts.size()) != post.dim())
          throw hf::ValidationError("--theta needs " + std::to_string(post.dim()) +
                                    " values, got " + std::to_string(parts.size()));
        for (std::size_t i = 0; i < parts.size(); ++i)
          theta[static_cast<Eigen::Index>(i)] = std::stod(parts[i]);
      }
      Eigen::VectorXd grad(post.dim());
      const double lp = post.value_grad(theta, grad);
      hf::Json out;
      out["dim"] = post.dim();
      out["log_posterior"] = lp;
      out["gradient"] = hf::Json::array();
      for (Eigen::Index i = 0; i < grad.size(); ++i) out["gradient"].push_back(grad[i]);
      std::cout << out.dump(2) << "\n";
      return hf::kExitOk;
    }

    // ---------------- simulate-mm ----------------
    if (*c_sim) {
      const hf::MultiMemSim sim =
          hf::sim_multi_mem(sim_nschools, sim_nstudents, sim_change, {}, sim_seed);
      std::ostringstream os;
      hf::write_csv(os, sim.data);
      write_out(sim_out, os.str());
      return hf::kExitOk;
    }
  } catch (const hf::ParseError& e) {
    std::cerr << "parse error: " << e.what() << " (at position " << e.span.begin << ")\n";
    return hf::kExitParse;
  } catch (const hf::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hf::kExitValidation;
  } catch (const hf::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hf::kExitValidation;
  } catch (const hf::SamplerError& e) {
    std::cerr << "sampler error: " << e.what() << "\n";
    return hf::kExitSampler;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hf::kExitUsage;
  }
  return hf::kExitUsage;
}
