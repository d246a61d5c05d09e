#pragma once
// Plumbing behind the command-line tool, kept in the library so tests can
// drive it directly: prior-string and model-file parsing, fit bundles on
// disk (atomic writes), and the parse -> validate -> sample -> summarize
// pipeline.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "hierform/codegen/program.hpp"
#include "hierform/density/posterior.hpp"
#include "hierform/formula/parser.hpp"
#include "hierform/infer/compare.hpp"
#include "hierform/infer/nuts.hpp"
#include "hierform/infer/predict.hpp"
#include "hierform/infer/summarize.hpp"
#include "hierform/model/json.hpp"
#include "hierform/model/spec.hpp"
#include "hierform/tabular/csv.hpp"

namespace hierform {

// stable process exit codes
enum ExitCode {
  kExitOk = 0,
  kExitUsage = 1,
  kExitParse = 2,
  kExitValidation = 3,
  kExitSampler = 4,
  kExitNonconverged = 5,
};

// ---------- files ----------

inline std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// write-temp-then-rename so partially written artifacts never appear
inline void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw DataError("cannot write '" + tmp + "'");
    os << content;
    if (!os) throw DataError("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw DataError("cannot rename '" + tmp + "' to '" + path + "'");
}

// ---------- prior strings ----------
// "normal(5000, 1000),nlpar=ult" / "student_t(3,0,10),class=Intercept,dpar=zi"
// qualifiers: class=b|Intercept|sd|cor|sds|sigma|zi, coef=, group=, dpar=, nlpar=

namespace detail {

inline std::vector<std::string> split_outside_parens(const std::string& s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string strip_ws(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline PriorDensity parse_prior_density(const std::string& text) {
  const std::string s = strip_ws(text);
  if (s == "flat" || s == "flat()") return PriorDensity::flat();
  const std::size_t lp = s.find('(');
  if (lp == std::string::npos || s.back() != ')')
    throw ValidationError("cannot parse prior density '" + s + "'");
  const std::string name = strip_ws(s.substr(0, lp));
  std::vector<double> args;
  for (const auto& piece : split_outside_parens(s.substr(lp + 1, s.size() - lp - 2), ',')) {
    const std::string p = strip_ws(piece);
    if (p.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(p.c_str(), &end);
    if (end != p.c_str() + p.size())
      throw ValidationError("bad numeric argument '" + p + "' in prior '" + s + "'");
    args.push_back(v);
  }
  auto want = [&](std::size_t k) {
    if (args.size() != k)
      throw ValidationError("prior '" + name + "' expects " + std::to_string(k) +
                            " arguments, got " + std::to_string(args.size()));
  };
  if (name == "normal") {
    want(2);
    return PriorDensity::normal(args[0], args[1]);
  }
  if (name == "student_t") {
    want(3);
    return PriorDensity::student_t(args[0], args[1], args[2]);
  }
  if (name == "half_student_t") {
    if (args.size() == 3) {
      if (args[1] != 0) throw ValidationError("half_student_t location must be 0");
      return PriorDensity::half_student_t(args[0], args[2]);
    }
    want(2);
    return PriorDensity::half_student_t(args[0], args[1]);
  }
  if (name == "lkj") {
    want(1);
    return PriorDensity::lkj(args[0]);
  }
  if (name == "uniform") {
    if (!args.empty()) {
      want(2);
      if (args[0] != 0 || args[1] != 1)
        throw ValidationError("only uniform(0, 1) is supported");
    }
    return PriorDensity::uniform_prob();
  }
  throw ValidationError("unknown prior density '" + name + "'");
}

}  // namespace detail

inline PriorSpec parse_prior_string(const std::string& text) {
  const auto pieces = detail::split_outside_parens(text, ',');
  if (pieces.empty()) throw ValidationError("empty prior specification");
  PriorSpec ps;
  ps.density = detail::parse_prior_density(pieces[0]);

  std::string cls = "b", coef, group, dpar, nlpar;
  for (std::size_t i = 1; i < pieces.size(); ++i) {
    const std::string kv = detail::strip_ws(pieces[i]);
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ValidationError("prior qualifier '" + kv + "' is not key=value");
    const std::string key = detail::strip_ws(kv.substr(0, eq));
    const std::string val = detail::strip_ws(kv.substr(eq + 1));
    if (key == "class")
      cls = val;
    else if (key == "coef")
      coef = val;
    else if (key == "group")
      group = val;
    else if (key == "dpar")
      dpar = val;
    else if (key == "nlpar")
      nlpar = val;
    else
      throw ValidationError("unknown prior qualifier '" + key + "'");
  }
  if (!dpar.empty() && !nlpar.empty())
    throw ValidationError("a prior may name a dpar or an nlpar, not both");
  const std::string owner = !dpar.empty() ? dpar : nlpar;  // "" = response (mu)

  PriorTarget& t = ps.target;
  t.owner = owner;
  if (cls == "b") {
    t.kind = coef.empty() ? PriorTarget::CoefClass : PriorTarget::Coef;
    t.coef = coef;
  } else if (cls == "Intercept") {
    if (!coef.empty()) throw ValidationError("class=Intercept does not take coef=");
    t.kind = PriorTarget::Intercept;
  } else if (cls == "sd") {
    t.kind = PriorTarget::Sd;
    t.group = group;
    t.coef = coef;
  } else if (cls == "cor") {
    t.kind = PriorTarget::Cor;
    t.group = group;
  } else if (cls == "sds") {
    t.kind = PriorTarget::SmoothSd;
    t.name = coef;
  } else if (cls == "sigma" || cls == "zi") {
    t.kind = PriorTarget::FamilyPar;
    t.name = cls;
  } else {
    throw ValidationError("unknown prior class '" + cls + "'");
  }
  return ps;
}

// ---------- model files ----------
// one formula per line; "name: formula" lines declare parameter formulas,
// '#' starts a comment, blank lines ignored

struct ModelFileSpec {
  std::string main;
  std::vector<std::string> extras;  // "name=rhs" form
};

inline ModelFileSpec parse_model_file(const std::string& text) {
  ModelFileSpec mf;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::strip_ws(line);
    if (line.empty()) continue;
    // "name:" prefix (identifier followed by ':' before any '~' or '(')
    std::size_t colon = line.find(':');
    bool is_extra = false;
    if (colon != std::string::npos) {
      const std::string head = detail::strip_ws(line.substr(0, colon));
      bool ident = !head.empty() && (std::isalpha(static_cast<unsigned char>(head[0])) || head[0] == '_');
      for (char c : head)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) ident = false;
      const std::size_t tilde = line.find('~');
      const std::size_t paren = line.find('(');
      if (ident && (tilde == std::string::npos || colon < tilde) &&
          (paren == std::string::npos || colon < paren))
        is_extra = true;
    }
    if (is_extra) {
      const std::string name = detail::strip_ws(line.substr(0, colon));
      const std::string rhs = detail::strip_ws(line.substr(colon + 1));
      mf.extras.push_back(name + "=" + rhs);
    } else {
      if (!mf.main.empty())
        throw ValidationError("model file has more than one response formula");
      mf.main = line;
    }
  }
  if (mf.main.empty()) throw ValidationError("model file has no response formula");
  return mf;
}

// ---------- model assembly from raw strings ----------

struct ModelInputs {
  std::string formula;
  std::vector<std::string> extras;  // "name=rhs", "name ~ rhs", or full text
  std::string family = "gaussian";
  bool nonlinear = false;
  std::vector<std::string> priors;
};

inline FormulaAst parse_extra_formula(const std::string& text) {
  if (text.find('~') != std::string::npos) return parse_formula(text);
  const std::size_t eq = text.find('=');
  if (eq == std::string::npos)
    throw ValidationError("extra formula '" + text + "' needs 'name=rhs' or 'name ~ rhs'");
  return parse_formula(detail::strip_ws(text.substr(0, eq)) + " ~ " +
                       detail::strip_ws(text.substr(eq + 1)));
}

inline ModelSpec make_model_spec(const ModelInputs& mi) {
  FormulaAst main = mi.nonlinear ? parse_nl_formula(mi.formula) : parse_formula(mi.formula);
  std::vector<FormulaAst> extras;
  for (const auto& e : mi.extras) extras.push_back(parse_extra_formula(e));
  std::vector<PriorSpec> priors;
  for (const auto& p : mi.priors) priors.push_back(parse_prior_string(p));
  return build_spec(std::move(main), std::move(extras), parse_family(mi.family),
                    mi.nonlinear, std::move(priors));
}

// ---------- the fit pipeline ----------

inline SummaryHeader make_summary_header(const CheckedSpec& cs, const std::string& data_name,
                                         int n_obs, const SamplerConfig& cfg) {
  SummaryHeader h;
  const FamilyInfo fam = family_info(cs.family);
  h.family = fam.name;
  h.links = "mu = " + std::string(link_name(cs.nonlinear ? cs.mu_link : fam.mu_link));
  for (std::size_t k = 0; k < fam.extra_dpars.size(); ++k)
    h.links += "; " + fam.extra_dpars[k] + " = " + link_name(fam.extra_links[k]);
  h.formula_lines.push_back(cs.main_text);
  for (const auto& t : cs.extra_texts) h.formula_lines.push_back(t);
  h.data_name = data_name;
  h.n_obs = n_obs;
  h.chains = cfg.chains;
  h.iter = cfg.iter;
  h.warmup = cfg.warmup;
  h.thin = cfg.thin;
  return h;
}

// everything a fitted model owns; heap-only because ParamSpace and the
// engines keep pointers into the DesignSet
struct Fit {
  Dataset data;
  std::string data_name;
  ModelInputs inputs;
  SamplerConfig cfg;
  CheckedSpec cs;
  DesignSet ds;
  ParamSpace ps;
  Draws draws;
  std::string summary_text;
  double wall_seconds = 0;

  Fit() = default;
  Fit(const Fit&) = delete;
  Fit& operator=(const Fit&) = delete;

  int total_divergences() const { return draws.divergence_count(); }
  int total_treedepth_hits() const { return draws.treedepth_count(); }
};

inline std::unique_ptr<Fit> run_fit(const ModelInputs& mi, Dataset data,
                                    const std::string& data_name, const SamplerConfig& cfg) {
  auto f = std::make_unique<Fit>();
  f->data = std::move(data);
  f->data_name = data_name;
  f->inputs = mi;
  f->cfg = cfg;
  const ModelSpec spec = make_model_spec(mi);
  f->cs = validate(spec, f->data);
  f->ds = assemble(f->cs, f->data);
  f->ps = ParamSpace::build(f->ds);
  LogPosterior post(f->ds, f->ps);
  const auto t0 = std::chrono::steady_clock::now();
  f->draws = nuts_sample(post, cfg);
  f->wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  f->summary_text = render_summary(
      make_summary_header(f->cs, data_name, static_cast<int>(f->ds.n), cfg), f->draws);
  return f;
}

// rebuild the design (no sampling) so prediction/compare can run off a bundle
inline std::unique_ptr<Fit> rebuild_fit(const ModelInputs& mi, Dataset data,
                                        const std::string& data_name, const SamplerConfig& cfg,
                                        Draws draws) {
  auto f = std::make_unique<Fit>();
  f->data = std::move(data);
  f->data_name = data_name;
  f->inputs = mi;
  f->cfg = cfg;
  const ModelSpec spec = make_model_spec(mi);
  f->cs = validate(spec, f->data);
  f->ds = assemble(f->cs, f->data);
  f->ps = ParamSpace::build(f->ds);
  f->draws = std::move(draws);
  f->summary_text = render_summary(
      make_summary_header(f->cs, data_name, static_cast<int>(f->ds.n), cfg), f->draws);
  return f;
}

// ---------- bundles on disk ----------

inline std::string matrix_csv(const Eigen::MatrixXd& m, const std::string& col_prefix) {
  std::ostringstream os;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    os << (j ? "," : "") << col_prefix << (j + 1);
  os << "\n";
  char buf[40];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.10g", m(i, j));
      os << (j ? "," : "") << buf;
    }
    os << "\n";
  }
  return os.str();
}

inline Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  std::size_t pos = 0, line_no = 1;
  std::vector<std::string> fields;
  if (!detail::next_record(text, pos, fields, line_no))
    throw DataError("empty matrix CSV '" + path + "'");
  const std::size_t cols = fields.size();
  std::vector<double> vals;
  std::size_t rows = 0;
  while (detail::next_record(text, pos, fields, line_no)) {
    if (fields.size() != cols)
      throw DataError("ragged matrix CSV '" + path + "'");
    for (const auto& f : fields) {
      double v = 0;
      if (!detail::parse_double(f, v))
        throw DataError("bad number '" + f + "' in '" + path + "'");
      vals.push_back(v);
    }
    ++rows;
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vals[i * cols + j];
  return m;
}

inline Json config_json(const Fit& f, const std::string& data_path) {
  Json j;
  j["formula"] = f.inputs.formula;
  j["extras"] = f.inputs.extras;
  j["family"] = f.inputs.family;
  j["nonlinear"] = f.inputs.nonlinear;
  j["priors"] = f.inputs.priors;
  j["data"] = Json{{"path", data_path},
                   {"name", f.data_name},
                   {"n_obs", static_cast<int>(f.ds.n)}};
  j["sampler"] = Json{{"chains", f.cfg.chains},
                      {"iter", f.cfg.iter},
                      {"warmup", f.cfg.warmup},
                      {"thin", f.cfg.thin},
                      {"adapt_delta", f.cfg.adapt_delta},
                      {"max_treedepth", f.cfg.max_treedepth},
                      {"seed", f.cfg.seed},
                      {"cores", f.cfg.cores},
                      {"init_range", f.cfg.init_range}};
  return j;
}

inline void save_bundle(const std::string& dir, const Fit& f, const std::string& data_path,
                        bool with_loglik = true) {
  std::filesystem::create_directories(dir);

  Json spec_j;
  spec_j["model"] = to_json(f.cs);
  {
    const ModelSpec ms = make_model_spec(f.inputs);
    spec_j["priors"] = Json::array();
    for (const auto& p : ms.priors) spec_j["priors"].push_back(to_json(p));
  }
  atomic_write_file(dir + "/spec.json", spec_j.dump(2) + "\n");
  atomic_write_file(dir + "/config.json", config_json(f, data_path).dump(2) + "\n");

  {
    std::ostringstream os;
    write_draws_csv(os, f.draws);
    atomic_write_file(dir + "/draws.csv", os.str());
  }
  atomic_write_file(dir + "/summary.txt", f.summary_text);

  if (with_loglik) {
    PredictorEngine eng(f.ds, f.ps, f.draws);
    atomic_write_file(dir + "/loglik.csv", matrix_csv(eng.pointwise_loglik(), "ll_"));
  }

  Json meta;
  meta["version"] = "0.1.0";
  meta["seed"] = f.cfg.seed;
  meta["wall_seconds"] = f.wall_seconds;
  meta["divergences"] = f.total_divergences();
  meta["treedepth_hits"] = f.total_treedepth_hits();
  meta["step_size"] = f.draws.step_size;
  atomic_write_file(dir + "/meta.json", meta.dump(2) + "\n");
}

struct LoadedBundle {
  std::string dir;
  ModelInputs inputs;
  SamplerConfig cfg;
  std::string data_path, data_name;
  int n_obs = 0;
  Draws draws;
  std::string summary_text;
  Json meta;
};

inline LoadedBundle load_bundle(const std::string& dir) {
  LoadedBundle b;
  b.dir = dir;
  const Json cj = Json::parse(read_text_file(dir + "/config.json"));
  b.inputs.formula = cj.at("formula").get<std::string>();
  for (const auto& e : cj.at("extras")) b.inputs.extras.push_back(e.get<std::string>());
  b.inputs.family = cj.at("family").get<std::string>();
  b.inputs.nonlinear = cj.at("nonlinear").get<bool>();
  for (const auto& p : cj.at("priors")) b.inputs.priors.push_back(p.get<std::string>());
  b.data_path = cj.at("data").at("path").get<std::string>();
  b.data_name = cj.at("data").at("name").get<std::string>();
  b.n_obs = cj.at("data").at("n_obs").get<int>();
  const Json& s = cj.at("sampler");
  b.cfg.chains = s.at("chains").get<int>();
  b.cfg.iter = s.at("iter").get<int>();
  b.cfg.warmup = s.at("warmup").get<int>();
  b.cfg.thin = s.at("thin").get<int>();
  b.cfg.adapt_delta = s.at("adapt_delta").get<double>();
  b.cfg.max_treedepth = s.at("max_treedepth").get<int>();
  b.cfg.seed = s.at("seed").get<std::uint64_t>();
  b.cfg.cores = s.at("cores").get<int>();
  b.cfg.init_range = s.at("init_range").get<double>();
  b.draws = read_draws_csv(dir + "/draws.csv");
  b.summary_text = read_text_file(dir + "/summary.txt");
  if (std::filesystem::exists(dir + "/meta.json"))
    b.meta = Json::parse(read_text_file(dir + "/meta.json"));
  return b;
}

// pointwise log-likelihood for a bundle: stored file if present, else recomputed
inline Eigen::MatrixXd bundle_loglik(const LoadedBundle& b, const std::string& data_override = "") {
  const std::string ll_path = b.dir + "/loglik.csv";
  if (data_override.empty() && std::filesystem::exists(ll_path))
    return read_matrix_csv(ll_path);
  const std::string path = data_override.empty() ? b.data_path : data_override;
  auto f = rebuild_fit(b.inputs, read_csv(path), b.data_name, b.cfg, b.draws);
  PredictorEngine eng(f->ds, f->ps, f->draws);
  return eng.pointwise_loglik();
}

// ---------- comparison table ----------

inline std::string render_compare_table(const std::string& name_a, const IcResult& a,
                                        const std::string& name_b, const IcResult& b,
                                        const IcDiff& d, bool loo) {
  const std::string diff_name = name_a + " - " + name_b;
  std::size_t w = std::max({name_a.size(), name_b.size(), diff_name.size()}) + 2;
  char buf[160];
  std::ostringstream os;
  std::snprintf(buf, sizeof(buf), "%-*s%9s%7s\n", static_cast<int>(w), "",
                loo ? "LOOIC" : "WAIC", "SE");
  os << buf;
  auto row = [&](const std::string& n, double ic, double se) {
    std::snprintf(buf, sizeof(buf), "%-*s%9.2f%7.2f\n", static_cast<int>(w), n.c_str(), ic, se);
    os << buf;
  };
  row(name_a, a.ic, a.se);
  row(name_b, b.ic, b.se);
  row(diff_name, d.diff, d.se);
  return os.str();
}

}  // namespace hierform
