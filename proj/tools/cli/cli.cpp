// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cli/cli.hpp"

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "cli/manifest.hpp"
#include "cli/report.hpp"
#include "depdse/io.hpp"

namespace depdse::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file could not be read; reported like a data error.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::string output_stem;
  std::string output_dir = ".";
  bool no_files = false;
  bool json = false;
  unsigned threads = 0;
};

struct DiagnoseOptions {
  std::string input;
  std::string format = "auto";
  std::optional<double> phi;
  std::optional<double> p;
  std::optional<double> p1dot;
  std::optional<double> population;
  bool with_fit = false;
};

struct FitFlags {
  std::string mode = "reduced";
  int starts = 12;
  int max_iterations = 500;
  double tolerance = 1e-8;

  FitOptions build(std::uint64_t seed) const {
    FitOptions o;
    o.mode = parse_fit_mode(mode);
    o.n_starts = starts;
    o.max_iterations = max_iterations;
    o.gradient_tolerance = tolerance;
    o.seed = seed;
    o.check();
    return o;
  }
};

struct EstimateOptions {
  std::string input;
  std::string format = "auto";
  std::string se = "both";
  int replicates = 500;
  std::uint64_t seed = kDefaultSeed;
  double level = 0.95;
  int max_retries = 10;
  double max_failure_fraction = 0.05;
  FitFlags fit;
};

struct SimulateOptions {
  int replicates = 500;
  std::uint64_t seed = kDefaultSeed;
  int max_redraws = 1000;
  FitFlags fit;
  // study2
  int scenario = 1;
  std::string grid = "0.01:0.35:0.01";
  // coverage
  std::string variance = "hessian";
  int bootstrap_replicates = 200;
  double level = 0.95;
  // custom
  Count n_a = 50'000;
  Count n_b = 20'000;
  double alpha = 0.05;
  double p1 = 0.15;
  std::optional<double> p1a;
  std::optional<double> p1b;
  double p2a = 0.05;
  double p2b = 0.15;
  std::string dependence = "negative";
};

// Everything a command hands back for writing.
struct Outcome {
  int code = kExitOk;
  Json result = Json::object();
  std::string text;
  std::string csv;
  RunManifest manifest;
};

std::string size_str(double v) {
  return std::isfinite(v) ? fmt::format("{:.0f}", v) : std::string("-");
}

std::string prob_str(double v) {
  return std::isfinite(v) ? fmt::format("{:.4f}", v) : std::string("-");
}

std::string pct_str(double v) {
  return std::isfinite(v) ? fmt::format("{:.2f}", v) : std::string("-");
}

bool is_size(std::string_view quantity) {
  return quantity == "N_A" || quantity == "N_B" || quantity == "N";
}

std::string value_str(std::string_view quantity, double v) {
  return is_size(quantity) ? size_str(v) : prob_str(v);
}

// Turns library domain errors raised while assembling a configuration into
// usage errors.
template <typename F>
auto as_usage(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

struct LoadedInput {
  SurveyData data;
  InputRecord record;
};

LoadedInput load_input(const std::string& path, const std::string& format_name) {
  const InputFormat requested = as_usage([&] { return parse_input_format(format_name); });
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input file '" + path + "'");
  const std::string bytes{std::istreambuf_iterator<char>(in),
                          std::istreambuf_iterator<char>()};
  InputFormat format = requested;
  if (format == InputFormat::kAuto) {
    std::string ext = fs::path(path).extension().string();
    for (char& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    format = ext == ".json" ? InputFormat::kJson : InputFormat::kCsv;
  }
  const auto raw = format == InputFormat::kJson ? parse_survey_json(bytes, path)
                                                : parse_survey_csv(bytes, path);
  return {validate(raw), {path, fnv1a64(bytes), bytes.size()}};
}

Json input_json(const SurveyData& data) {
  Json strata = Json::array();
  for (const Stratum* s : {&data.a, &data.b}) {
    Json j = to_json(s->counts);
    j["label"] = s->label;
    strata.push_back(j);
  }
  return Json{{"strata", strata}};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.close();
  if (!out) throw InputError("cannot write '" + path.string() + "'");
}

int emit(Outcome& o, const GlobalOptions& g, const std::string& default_stem,
         std::ostream& out, std::ostream& err) {
  o.result["status"] = o.code == kExitOk ? "ok" : "error";
  o.manifest.version = std::string(tool_version());
  o.manifest.timestamp = utc_timestamp();
  o.manifest.output_digest = fnv1a64(o.result.dump());
  const Json report{{"manifest", to_json(o.manifest)}, {"result", o.result}};
  const std::string report_text = report.dump(2) + "\n";

  if (g.json) {
    out << report_text;
  } else {
    out << o.text;
  }
  if (g.no_files) return o.code;

  const std::string stem = g.output_stem.empty() ? default_stem : g.output_stem;
  const fs::path dir(g.output_dir);
  try {
    if (!dir.empty()) fs::create_directories(dir);
    const fs::path json_path = dir / (stem + ".report.json");
    write_file(json_path, report_text);
    std::vector<std::string> written{json_path.string()};
    if (!o.csv.empty()) {
      const fs::path csv_path = dir / (stem + ".summary.csv");
      write_file(csv_path, o.csv);
      written.push_back(csv_path.string());
    }
    if (!g.json) {
      out << "\nwrote " << fmt::format("{}", fmt::join(written, ", ")) << "\n";
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return o.code;
}

std::string input_stem(const std::string& path) {
  return fs::path(path).stem().string();
}

// diagnose ----------------------------------------------------------------

Outcome cmd_diagnose(const DiagnoseOptions& opt, std::ostream& err) {
  Outcome o;
  o.manifest.command = "diagnose";
  o.manifest.options = {{"input", opt.input}, {"format", opt.format},
                        {"with_fit", opt.with_fit}};

  const int given = opt.phi.has_value() + opt.p.has_value() +
                    opt.p1dot.has_value() + opt.population.has_value();
  if (given != 0 && given != 4) {
    throw UsageError("--phi, --p, --p1dot and --N must be given together");
  }
  std::optional<double> bias;
  if (given == 4) {
    bias = as_usage([&] {
      return lp_bias_approx(*opt.population, *opt.p1dot, *opt.p, *opt.phi);
    });
    o.manifest.options["phi"] = *opt.phi;
    o.manifest.options["p"] = *opt.p;
    o.manifest.options["p1dot"] = *opt.p1dot;
    o.manifest.options["N"] = *opt.population;
  }

  const LoadedInput in = load_input(opt.input, opt.format);
  o.manifest.inputs.push_back(in.record);
  const SurveyData& data = in.data;

  std::optional<FitResult> fitted;
  std::optional<std::string> fit_error;
  if (opt.with_fit) {
    try {
      fitted = fit(data);
    } catch (const FitError& e) {
      fit_error = e.what();
      o.code = kExitFailure;
    }
  }
  std::optional<std::array<double, 2>> pops;
  if (fitted) pops = std::array<double, 2>{fitted->params.n_a, fitted->params.n_b};
  const Diagnostics d = diagnose(data, pops);

  o.result["input"] = input_json(data);
  o.result["diagnostics"] = to_json(d);
  o.result["bias_approximation"] =
      bias ? Json{{"N", *opt.population}, {"p1dot", *opt.p1dot}, {"p", *opt.p},
                  {"phi", *opt.phi}, {"bias", number(*bias)}}
           : Json(nullptr);
  if (opt.with_fit) {
    o.result["fit"] = fitted ? to_json(*fitted) : Json(nullptr);
    if (fit_error) o.result["error"] = *fit_error;
  }

  std::string& t = o.text;
  t += fmt::format("Diagnostics for {}\n\n", opt.input);
  t += fmt::format("{:<14} {:>8} {:>8} {:>8} {:>8} {:>8} {:>10}\n", "stratum", "x11",
                   "x10", "x01", "c_hat", "p_hat", "naive");
  const std::array<const Stratum*, 2> strata = {&data.a, &data.b};
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& s = d.strata[i];
    const CellCounts& c = strata[i]->counts;
    t += fmt::format("{:<14} {:>8} {:>8} {:>8} {:>8} {:>8} {:>10}\n", s.label, c.x11,
                     c.x10, c.x01, prob_str(s.c_hat), prob_str(s.p_hat),
                     s.naive ? size_str(*s.naive) : std::string("undefined"));
  }
  t += fmt::format("{:<14} {:>55}\n", "pooled",
                   d.naive_pooled ? size_str(*d.naive_pooled) : std::string("undefined"));
  for (const auto& s : d.strata) {
    if (!s.naive) {
      t += fmt::format("warning: stratum {} has x11 = 0; naive estimator undefined\n",
                       s.label);
    }
  }
  t += fmt::format("\np_hat evaluated at {}\n",
                   fitted ? "the dependent-model MLE sizes" : "the naive sizes");
  if (fitted) {
    t += fmt::format("dependent MLE: N_A {}  N_B {}  N {}\n", size_str(fitted->params.n_a),
                     size_str(fitted->params.n_b), size_str(fitted->n_hat_total));
  }
  if (fit_error) err << "error: fit failed: " << *fit_error << "\n";
  if (bias) {
    t += fmt::format("approximate naive bias (N {}, p1. {}, p {}, phi {}): {:.1f}\n",
                     *opt.population, *opt.p1dot, *opt.p, *opt.phi, *bias);
  }

  CsvWriter csv({"stratum", "x11", "x10", "x01", "c_hat", "p_hat", "p_hat_population",
                 "naive"});
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& s = d.strata[i];
    const CellCounts& c = strata[i]->counts;
    csv.cell(s.label).cell(static_cast<long long>(c.x11))
        .cell(static_cast<long long>(c.x10)).cell(static_cast<long long>(c.x01))
        .cell(s.c_hat).cell(s.p_hat).cell(s.p_hat_population)
        .cell(s.naive.value_or(std::nan("")));
    csv.end_row();
  }
  const CellCounts pooled = data.pooled();
  csv.cell(std::string("pooled")).cell(static_cast<long long>(pooled.x11))
      .cell(static_cast<long long>(pooled.x10)).cell(static_cast<long long>(pooled.x01))
      .empty().empty().empty().cell(d.naive_pooled.value_or(std::nan("")));
  csv.end_row();
  o.csv = csv.str();
  return o;
}

// estimate ----------------------------------------------------------------

std::string start_table(const std::vector<StartDiagnostics>& starts) {
  std::string t = fmt::format("{:>5} {:>10} {:>10} {:>9} {:>6} {:>10}  {}\n", "start",
                              "N", "logL", "converged", "iters", "pg_norm", "message");
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const auto& s = starts[i];
    t += fmt::format("{:>5} {:>10} {:>10.3f} {:>9} {:>6} {:>10.2e}  {}\n", i,
                     size_str(s.end.total()), s.log_likelihood, s.converged ? "yes" : "no",
                     s.iterations, s.projected_gradient_norm, s.message);
  }
  return t;
}

Outcome cmd_estimate(const EstimateOptions& opt, const GlobalOptions& g,
                     std::ostream& err) {
  Outcome o;
  o.manifest.command = "estimate";
  o.manifest.seed = opt.seed;

  const SeMethod method = as_usage([&] { return parse_se_method(opt.se); });
  if (method != SeMethod::kHessian && opt.replicates < 1) {
    throw UsageError("B must be \xE2\x89\xA5 1 for bootstrap");
  }
  if (!(opt.level > 0.0 && opt.level < 1.0)) {
    throw UsageError("--level must lie in (0, 1)");
  }
  const FitOptions fit_options = as_usage([&] { return opt.fit.build(opt.seed); });
  BootstrapOptions boot;
  boot.replicates = opt.replicates;
  boot.seed = opt.seed;
  boot.threads = g.threads;
  boot.max_retries = opt.max_retries;
  boot.max_failure_fraction = opt.max_failure_fraction;
  boot.fit = fit_options;

  o.manifest.options = {{"input", opt.input},
                        {"format", opt.format},
                        {"se", to_string(method)},
                        {"B", opt.replicates},
                        {"level", opt.level},
                        {"max_retries", opt.max_retries},
                        {"max_failure_fraction", opt.max_failure_fraction},
                        {"threads", g.threads},
                        {"fit", to_json(fit_options)}};

  const LoadedInput in = load_input(opt.input, opt.format);
  o.manifest.inputs.push_back(in.record);
  const SurveyData& data = in.data;
  o.result["input"] = input_json(data);

  FitResult f;
  try {
    f = fit(data, fit_options);
  } catch (const FitError& e) {
    o.code = kExitFailure;
    o.result["error"] = e.what();
    Json starts = Json::array();
    for (const auto& s : e.diagnostics()) starts.push_back(to_json(s));
    o.result["starts"] = starts;
    err << "error: " << e.what() << "\n";
    if (!e.diagnostics().empty()) err << start_table(e.diagnostics());
    return o;
  }
  o.result["fit"] = to_json(f);

  const Diagnostics diag = diagnose(data);
  const std::array<double, 3> naive = {diag.strata[0].naive.value_or(std::nan("")),
                                       diag.strata[1].naive.value_or(std::nan("")),
                                       diag.naive_pooled.value_or(std::nan(""))};
  o.result["naive"] = {{"N_A", number(naive[0])}, {"N_B", number(naive[1])},
                       {"N", number(naive[2])}};

  UncertaintyReport u;
  try {
    u = assess_uncertainty(data, f, method, boot, opt.level);
  } catch (const BootstrapError& e) {
    o.code = kExitFailure;
    o.result["error"] = e.what();
    o.result["bootstrap"] = to_json(e.partial());
    err << "error: " << e.what() << "\n";
    return o;
  } catch (const InferenceError& e) {
    o.code = kExitFailure;
    o.result["error"] = e.what();
    err << "error: " << e.what() << "\n";
    return o;
  }
  if (u.hessian_error) {
    o.code = kExitFailure;
    o.result["error"] = "hessian standard errors unavailable: " + *u.hessian_error;
    err << "error: hessian standard errors unavailable: " << *u.hessian_error << "\n";
  }
  o.result["hessian"] = u.hessian ? to_json(*u.hessian) : Json(nullptr);
  o.result["bootstrap"] = u.bootstrap ? to_json(*u.bootstrap) : Json(nullptr);
  o.result["intervals"] = {
      {"level", opt.level},
      {"point", "mle"},
      {"hessian", u.hessian_intervals ? to_json(*u.hessian_intervals) : Json(nullptr)},
      {"bootstrap",
       u.bootstrap_intervals ? to_json(*u.bootstrap_intervals) : Json(nullptr)}};

  // Text report, shaped like a results table: one row per stratum and total.
  const double nan = std::nan("");
  auto hse = [&](Quantity q) {
    if (!u.hessian) return nan;
    switch (q) {
      case Quantity::kTotal: return u.hessian->se_total;
      case Quantity::kNA: return u.hessian->se_of(Param::kNA);
      case Quantity::kNB: return u.hessian->se_of(Param::kNB);
      case Quantity::kAlpha: return u.hessian->se_of(Param::kAlpha);
      case Quantity::kP1: return u.hessian->se_of(Param::kP1);
      case Quantity::kP2A: return u.hessian->se_of(Param::kP2A);
      case Quantity::kP2B: return u.hessian->se_of(Param::kP2B);
    }
    return nan;
  };
  auto bse = [&](Quantity q) { return u.bootstrap ? u.bootstrap->se_of(q) : nan; };
  auto bmean = [&](Quantity q) { return u.bootstrap ? u.bootstrap->mean_of(q) : nan; };

  std::string& t = o.text;
  t += fmt::format("Dependent dual-system estimate for {}\n", opt.input);
  t += fmt::format("mode {}, best of {} starts (start {}), {} iterations, logL {:.6f}\n\n",
                   to_string(f.mode), f.per_start.size(), f.best_start, f.iterations,
                   f.log_likelihood);
  t += fmt::format("{:<14} {:>10} {:>10} {:>10} {:>10} {:>10}\n", "", "naive", "N_dep",
                   "SE hess", "SE boot", "boot mean");
  const std::array<std::pair<std::string, Quantity>, 3> sizes = {
      {{data.a.label, Quantity::kNA}, {data.b.label, Quantity::kNB},
       {"total", Quantity::kTotal}}};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& [label, q] = sizes[i];
    t += fmt::format("{:<14} {:>10} {:>10} {:>10} {:>10} {:>10}\n", label,
                     size_str(naive[i]), size_str(quantity_of(f.params, q)),
                     size_str(hse(q)), size_str(bse(q)), size_str(bmean(q)));
  }
  t += fmt::format("\n{:.0f}% intervals around N_dep\n", 100.0 * opt.level);
  t += fmt::format("{:<10} {:<14} {:>21} {:>21}\n", "se", "", "log-normal", "standard");
  auto add_intervals = [&](const char* source, const std::optional<VarianceIntervals>& v) {
    if (!v) return;
    const std::array<std::pair<const Interval*, const Interval*>, 3> rows = {
        {{&v->lognormal.n_a, &v->wald.n_a},
         {&v->lognormal.n_b, &v->wald.n_b},
         {&v->lognormal.total, &v->wald.total}}};
    for (std::size_t i = 0; i < 3; ++i) {
      t += fmt::format("{:<10} {:<14} {:>21} {:>21}\n", source, sizes[i].first,
                       fmt::format("[{}, {}]", size_str(rows[i].first->lower),
                                   size_str(rows[i].first->upper)),
                       fmt::format("[{}, {}]", size_str(rows[i].second->lower),
                                   size_str(rows[i].second->upper)));
    }
  };
  add_intervals("hessian", u.hessian_intervals);
  add_intervals("bootstrap", u.bootstrap_intervals);

  t += fmt::format("\n{:<14} {:>10} {:>10} {:>10} {:>10}\n", "parameter", "estimate",
                   "SE hess", "SE boot", "boot mean");
  for (Quantity q : {Quantity::kAlpha, Quantity::kP1, Quantity::kP2A, Quantity::kP2B}) {
    t += fmt::format("{:<14} {:>10} {:>10} {:>10} {:>10}\n", quantity_name(q),
                     prob_str(quantity_of(f.params, q)), prob_str(hse(q)),
                     prob_str(bse(q)), prob_str(bmean(q)));
  }
  std::string active;
  for (Param p : f.active_constraints) {
    active += (active.empty() ? "" : ", ") + std::string(param_name(p));
  }
  t += fmt::format("\nactive bounds: {}\n", active.empty() ? "none" : active);
  if (f.reduced_fallback) {
    t += "note: no reduced-mode point satisfies the size bounds; fitted in full mode\n";
  }
  if (u.bootstrap) {
    t += fmt::format("bootstrap: {} requested, {} successful, {} failed, {} retries, seed {}\n",
                     u.bootstrap->requested, u.bootstrap->successful, u.bootstrap->failed,
                     u.bootstrap->retries, opt.seed);
  }

  std::vector<std::string> header = {"quantity", "naive", "estimate", "se_hessian",
                                     "se_bootstrap", "bootstrap_mean"};
  for (const char* src : {"hessian", "bootstrap"}) {
    for (const char* kind : {"lognormal", "standard"}) {
      header.push_back(fmt::format("{}_{}_lower", src, kind));
      header.push_back(fmt::format("{}_{}_upper", src, kind));
    }
  }
  CsvWriter csv(header);
  for (Quantity q : kAllQuantities) {
    const int qi = static_cast<int>(q);
    csv.cell(std::string(quantity_name(q))).cell(qi < 3 ? naive[qi] : nan)
        .cell(quantity_of(f.params, q)).cell(hse(q)).cell(bse(q)).cell(bmean(q));
    for (const auto* v : {&u.hessian_intervals, &u.bootstrap_intervals}) {
      for (int kind = 0; kind < 2; ++kind) {
        if (!v->has_value() || qi >= 3) {
          csv.empty().empty();
          continue;
        }
        const SizeIntervals& s = kind == 0 ? (*v)->lognormal : (*v)->wald;
        const Interval& iv = qi == 0 ? s.n_a : (qi == 1 ? s.n_b : s.total);
        csv.cell(iv.lower).cell(iv.upper);
      }
    }
    csv.end_row();
  }
  o.csv = csv.str();
  return o;
}

// simulate ----------------------------------------------------------------

StudyOptions study_options(const SimulateOptions& opt, const GlobalOptions& g) {
  StudyOptions s;
  s.threads = g.threads;
  s.max_redraws = opt.max_redraws;
  s.fit = as_usage([&] { return opt.fit.build(opt.seed); });
  if (opt.max_redraws < 0) throw UsageError("--max-redraws must be >= 0");
  return s;
}

std::string config_line(const GeneratorConfig& c) {
  return fmt::format(
      "N_A {} N_B {} alpha {} p1A {} p1B {} p2A {} p2B {} ({} dependence), {} replicates, "
      "seed {}\n",
      c.a.population, c.b.population, c.alpha, c.a.p1, c.b.p1, c.a.p2, c.b.p2,
      to_string(c.dependence), c.replicates, c.seed);
}

void summary_table(std::string& t, CsvWriter& csv, const char* estimator,
                   const std::vector<SummaryRow>& rows) {
  for (const auto& r : rows) {
    t += fmt::format("{:<9} {:<6} {:>10} {:>10} {:>10} {:>9} {:>8} {:>10} {:>6}\n",
                     estimator, r.quantity, value_str(r.quantity, r.truth),
                     value_str(r.quantity, r.expected), value_str(r.quantity, r.bias),
                     pct_str(r.relative_bias_pct), pct_str(r.cv_pct),
                     value_str(r.quantity, r.rmse), r.bias_within_mc_error ? "~0" : "");
    csv.cell(std::string(estimator)).cell(r.quantity).cell(r.truth).cell(r.expected)
        .cell(r.bias).cell(r.relative_bias_pct).cell(r.bias_over_truth_pct).cell(r.variance).cell(r.cv_pct)
        .cell(r.rmse).cell(r.bias_within_mc_error).cell(r.replicates).cell(r.failures);
    csv.end_row();
  }
}

Outcome study_outcome(const char* command, const GeneratorConfig& config,
                      const StudyOptions& so) {
  Outcome o;
  o.manifest.command = command;
  o.manifest.seed = config.seed;
  o.manifest.options = {{"config", to_json(config)},
                        {"max_redraws", so.max_redraws},
                        {"threads", so.threads},
                        {"fit", to_json(so.fit)}};
  const StudyResult r = run_study(config, so);
  Json naive = Json::array();
  Json proposed = Json::array();
  for (const auto& row : r.naive) naive.push_back(to_json(row));
  for (const auto& row : r.proposed) proposed.push_back(to_json(row));
  o.result = {{"config", to_json(config)},
              {"naive", naive},
              {"proposed", proposed},
              {"redraws", r.redraws},
              {"fit_failures", r.fit_failures},
              {"reduced_fallbacks", r.reduced_fallbacks}};

  std::string& t = o.text;
  t += "Simulation: " + config_line(config) + "\n";
  t += fmt::format("{:<9} {:<6} {:>10} {:>10} {:>10} {:>9} {:>8} {:>10} {:>6}\n",
                   "estimator", "param", "truth", "mean", "bias", "rbias%", "cv%", "rmse",
                   "bias");
  CsvWriter csv({"estimator", "quantity", "truth", "expected", "bias", "relative_bias_pct",
                 "bias_over_truth_pct", "variance", "cv_pct", "rmse", "bias_within_mc_error", "replicates",
                 "failures"});
  summary_table(t, csv, "naive", r.naive);
  summary_table(t, csv, "proposed", r.proposed);
  t += fmt::format("\nredraws (x11 = 0): {}   fit failures: {}   reduced-mode fallbacks: {}\n",
                   r.redraws, r.fit_failures, r.reduced_fallbacks);
  t += "rbias% = 100 (mean - truth) / mean; bias column \"~0\" when |bias| <= 2 SD / sqrt(R)\n";
  o.csv = csv.str();
  return o;
}

Outcome cmd_study1(const SimulateOptions& opt, const GlobalOptions& g) {
  const StudyOptions so = study_options(opt, g);
  const GeneratorConfig c = as_usage([&] {
    GeneratorConfig cfg = study1_config(opt.replicates, opt.seed);
    cfg.check();
    return cfg;
  });
  return study_outcome("simulate study1", c, so);
}

Outcome cmd_custom(const SimulateOptions& opt, const GlobalOptions& g) {
  const StudyOptions so = study_options(opt, g);
  const GeneratorConfig c = as_usage([&] {
    GeneratorConfig cfg;
    cfg.a = {opt.n_a, opt.p1a.value_or(opt.p1), opt.p2a};
    cfg.b = {opt.n_b, opt.p1b.value_or(opt.p1), opt.p2b};
    cfg.alpha = opt.alpha;
    cfg.dependence = parse_dependence(opt.dependence);
    cfg.replicates = opt.replicates;
    cfg.seed = opt.seed;
    cfg.check();
    return cfg;
  });
  return study_outcome("simulate custom", c, so);
}

Outcome cmd_study2(const SimulateOptions& opt, const GlobalOptions& g) {
  const StudyOptions so = study_options(opt, g);
  const std::vector<double> grid = as_usage([&] {
    auto values = parse_grid(opt.grid);
    for (double v : values) study2_config(opt.scenario, v, opt.replicates, opt.seed).check();
    return values;
  });
  Outcome o;
  o.manifest.command = "simulate study2";
  o.manifest.seed = opt.seed;
  o.manifest.options = {{"scenario", opt.scenario}, {"grid", opt.grid},
                        {"replicates", opt.replicates}, {"max_redraws", so.max_redraws},
                        {"threads", so.threads}, {"fit", to_json(so.fit)}};
  const auto points = run_study2(opt.scenario, grid, opt.replicates, opt.seed, so);

  std::vector<std::string> header = {"scenario", "grid_value", "p1A", "p1B", "p2A", "p2B"};
  for (const char* est : {"proposed", "naive"}) {
    for (const char* q : {"N_A", "N_B", "N"}) {
      for (const char* stat : {"bias", "relative_bias_pct", "rmse"}) {
        header.push_back(fmt::format("{}_{}_{}", est, q, stat));
      }
    }
  }
  header.push_back("redraws");
  header.push_back("fit_failures");
  header.push_back("reduced_fallbacks");
  CsvWriter csv(header);
  Json jpoints = Json::array();
  std::string& t = o.text;
  const char* varied = opt.scenario == 2 ? "p1A" : "p1B";
  t += fmt::format("Study 2, scenario {}: {} varied over {} ({} replicates per point, seed {})\n\n",
                   opt.scenario, varied, opt.grid, opt.replicates, opt.seed);
  t += fmt::format("{:>6} {:>10} {:>10} {:>9} {:>10} {:>10} {:>9}\n", varied, "bias N",
                   "rmse N", "rbias%", "naive bias", "naive rmse", "rbias%");
  for (const auto& p : points) {
    csv.cell(opt.scenario).cell(p.grid_value).cell(p.config.a.p1).cell(p.config.b.p1)
        .cell(p.config.a.p2).cell(p.config.b.p2);
    for (const auto* rows : {&p.proposed, &p.naive}) {
      for (const auto& r : *rows) csv.cell(r.bias).cell(r.relative_bias_pct).cell(r.rmse);
    }
    csv.cell(p.redraws).cell(p.fit_failures).cell(p.reduced_fallbacks);
    csv.end_row();
    Json jp{{"grid_value", p.grid_value}, {"config", to_json(p.config)}};
    Json prop = Json::array();
    Json naive = Json::array();
    for (const auto& r : p.proposed) prop.push_back(to_json(r));
    for (const auto& r : p.naive) naive.push_back(to_json(r));
    jp["proposed"] = prop;
    jp["naive"] = naive;
    jp["redraws"] = p.redraws;
    jp["fit_failures"] = p.fit_failures;
    jp["reduced_fallbacks"] = p.reduced_fallbacks;
    jpoints.push_back(jp);
    const SummaryRow& pn = p.proposed[2];
    const SummaryRow& nn = p.naive[2];
    t += fmt::format("{:>6} {:>10} {:>10} {:>9} {:>10} {:>10} {:>9}\n", p.grid_value,
                     size_str(pn.bias), size_str(pn.rmse), pct_str(pn.relative_bias_pct),
                     size_str(nn.bias), size_str(nn.rmse), pct_str(nn.relative_bias_pct));
  }
  o.result = {{"scenario", opt.scenario}, {"grid", grid}, {"points", jpoints}};
  o.csv = csv.str();
  return o;
}

Outcome cmd_coverage(const SimulateOptions& opt, const GlobalOptions& g) {
  const StudyOptions so = study_options(opt, g);
  const GeneratorConfig c = as_usage([&] {
    GeneratorConfig cfg = study1_config(opt.replicates, opt.seed);
    cfg.check();
    return cfg;
  });
  CoverageOptions co;
  co.source = as_usage([&] { return parse_variance_source(opt.variance); });
  co.bootstrap_replicates = opt.bootstrap_replicates;
  co.level = opt.level;
  if (!(co.level > 0.0 && co.level < 1.0)) throw UsageError("--level must lie in (0, 1)");
  if (co.source == VarianceSource::kBootstrap && co.bootstrap_replicates < 1) {
    throw UsageError("B must be \xE2\x89\xA5 1 for bootstrap");
  }

  Outcome o;
  o.manifest.command = "simulate coverage";
  o.manifest.seed = opt.seed;
  o.manifest.options = {{"config", to_json(c)},
                        {"variance", to_string(co.source)},
                        {"bootstrap_replicates", co.bootstrap_replicates},
                        {"level", co.level},
                        {"max_redraws", so.max_redraws},
                        {"threads", so.threads},
                        {"fit", to_json(so.fit)}};
  const CoverageResult r = run_coverage(c, co, so);
  Json rows = Json::array();
  for (const auto& row : r.rows) rows.push_back(to_json(row));
  o.result = {{"config", to_json(c)},
              {"variance", to_string(co.source)},
              {"level", co.level},
              {"rows", rows},
              {"redraws", r.redraws},
              {"failures", r.failures}};

  std::string& t = o.text;
  t += "Coverage: " + config_line(c);
  t += fmt::format("variance from {}, level {}\n\n", to_string(co.source), co.level);
  t += fmt::format("{:<6} {:<10} {:>11} {:>11} {:>9} {:>6}\n", "param", "interval",
                   "mean lower", "mean upper", "coverage", "reps");
  CsvWriter csv({"quantity", "interval", "mean_lower", "mean_upper", "coverage",
                 "replicates"});
  for (const auto& row : r.rows) {
    t += fmt::format("{:<6} {:<10} {:>11} {:>11} {:>9} {:>6}\n", row.quantity,
                     row.interval, size_str(row.mean_lower), size_str(row.mean_upper),
                     prob_str(row.coverage), row.replicates);
    csv.cell(row.quantity).cell(row.interval).cell(row.mean_lower).cell(row.mean_upper)
        .cell(row.coverage).cell(row.replicates);
    csv.end_row();
  }
  t += fmt::format("\nredraws (x11 = 0): {}   failures: {}\n", r.redraws, r.failures);
  o.csv = csv.str();
  return o;
}

// wiring ------------------------------------------------------------------

void add_fit_flags(CLI::App* app, FitFlags& f) {
  app->add_option("--mode", f.mode, "Fit mode")
      ->check(CLI::IsMember({"reduced", "full"}))
      ->capture_default_str();
  app->add_option("--starts", f.starts, "Number of optimizer starts")->capture_default_str();
  app->add_option("--max-iter", f.max_iterations, "Newton iterations per start")
      ->capture_default_str();
  app->add_option("--tol", f.tolerance, "Projected-gradient tolerance")->capture_default_str();
}

void add_simulate_common(CLI::App* app, SimulateOptions& s) {
  app->add_option("--replicates,-R", s.replicates, "Monte-Carlo replicates")
      ->capture_default_str();
  app->add_option("--seed", s.seed, "Base seed")->capture_default_str();
  app->add_option("--max-redraws", s.max_redraws,
                  "Redraw budget per replicate when x11 = 0")
      ->capture_default_str();
  add_fit_flags(app, s.fit);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dependent dual-system estimation for two negatively dependent lists"};
  app.name("depdse");
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "depdse " + std::string(tool_version()));

  GlobalOptions g;
  app.add_option("--output,-o", g.output_stem,
                 "Output stem for <stem>.report.json and <stem>.summary.csv");
  app.add_option("--output-dir", g.output_dir, "Directory for output files")
      ->capture_default_str();
  app.add_flag("--no-files", g.no_files, "Do not write report files");
  app.add_flag("--json", g.json, "Print the JSON report instead of the text table");
  app.add_option("--threads", g.threads,
                 "Worker threads (0: DEPDSE_THREADS or hardware concurrency)")
      ->capture_default_str();

  DiagnoseOptions dopt;
  auto* diag = app.add_subcommand("diagnose", "c-hat diagnostics and naive estimates");
  diag->add_option("input,--input,-i", dopt.input, "CSV or JSON counts")->required();
  diag->add_option("--format", dopt.format)
      ->check(CLI::IsMember({"auto", "csv", "json"}))
      ->capture_default_str();
  diag->add_option("--phi", dopt.phi, "Behavioural response effect");
  diag->add_option("--p", dopt.p, "List-2 capture probability");
  diag->add_option("--p1dot", dopt.p1dot, "List-1 capture probability");
  diag->add_option("--N", dopt.population, "Population size");
  diag->add_flag("--with-fit", dopt.with_fit,
                 "Also fit the dependent model and evaluate p_hat at its sizes");

  EstimateOptions eopt;
  auto* est = app.add_subcommand("estimate", "Fit the dependent model with uncertainty");
  est->add_option("input,--input,-i", eopt.input, "CSV or JSON counts")->required();
  est->add_option("--format", eopt.format)
      ->check(CLI::IsMember({"auto", "csv", "json"}))
      ->capture_default_str();
  est->add_option("--se", eopt.se, "Standard-error method")
      ->check(CLI::IsMember({"hessian", "bootstrap", "both"}))
      ->capture_default_str();
  est->add_option("-B,--B", eopt.replicates, "Bootstrap replicates")->capture_default_str();
  est->add_option("--seed", eopt.seed, "Seed")->capture_default_str();
  est->add_option("--level", eopt.level, "Interval level")->capture_default_str();
  est->add_option("--max-retries", eopt.max_retries,
                  "Fresh draws per failed bootstrap replicate")
      ->capture_default_str();
  est->add_option("--max-failure-fraction", eopt.max_failure_fraction,
                  "Tolerated fraction of failed bootstrap replicates")
      ->capture_default_str();
  add_fit_flags(est, eopt.fit);

  SimulateOptions sopt;
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo studies");
  sim->require_subcommand(1);
  sim->fallthrough();
  auto* s1 = sim->add_subcommand("study1", "N_A=50000, N_B=20000, alpha=0.05, negative dependence");
  add_simulate_common(s1, sopt);
  auto* s2 = sim->add_subcommand("study2", "Sweeps violating the shared-p1 assumption");
  add_simulate_common(s2, sopt);
  s2->add_option("--scenario", sopt.scenario, "1, 2 or 3")->capture_default_str();
  s2->add_option("--grid", sopt.grid, "start:stop:step or comma list")
      ->capture_default_str();
  auto* cov = sim->add_subcommand("coverage", "Interval coverage under Study 1");
  add_simulate_common(cov, sopt);
  cov->add_option("--variance", sopt.variance, "Variance source for the intervals")
      ->check(CLI::IsMember({"hessian", "bootstrap", "zero"}))
      ->capture_default_str();
  cov->add_option("-B,--B", sopt.bootstrap_replicates,
                  "Bootstrap replicates per dataset with --variance bootstrap")
      ->capture_default_str();
  cov->add_option("--level", sopt.level, "Interval level")->capture_default_str();
  auto* custom = sim->add_subcommand("custom", "User-specified generator");
  add_simulate_common(custom, sopt);
  custom->add_option("--NA", sopt.n_a, "Stratum A size")->capture_default_str();
  custom->add_option("--NB", sopt.n_b, "Stratum B size")->capture_default_str();
  custom->add_option("--alpha", sopt.alpha)->capture_default_str();
  custom->add_option("--p1", sopt.p1, "List-1 probability in both strata")
      ->capture_default_str();
  custom->add_option("--p1A", sopt.p1a, "Override p1 in stratum A");
  custom->add_option("--p1B", sopt.p1b, "Override p1 in stratum B");
  custom->add_option("--p2A", sopt.p2a)->capture_default_str();
  custom->add_option("--p2B", sopt.p2b)->capture_default_str();
  custom->add_option("--dependence", sopt.dependence)
      ->check(CLI::IsMember({"negative", "positive", "independent"}))
      ->capture_default_str();

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("depdse");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Outcome o;
    std::string stem;
    if (diag->parsed()) {
      o = cmd_diagnose(dopt, err);
      stem = input_stem(dopt.input) + ".diagnose";
    } else if (est->parsed()) {
      o = cmd_estimate(eopt, g, err);
      stem = input_stem(eopt.input) + ".estimate";
    } else if (s1->parsed()) {
      o = cmd_study1(sopt, g);
      stem = "study1";
    } else if (s2->parsed()) {
      o = cmd_study2(sopt, g);
      stem = fmt::format("study2_scenario{}", sopt.scenario);
    } else if (cov->parsed()) {
      o = cmd_coverage(sopt, g);
      stem = "coverage";
    } else {
      o = cmd_custom(sopt, g);
      stem = "custom";
    }
    o.manifest.arguments = args;
    return emit(o, g, stem, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const ValidationError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace depdse::cli
