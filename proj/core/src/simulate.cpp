// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "depdse/simulate.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <utility>

#include "depdse/parallel.hpp"

namespace depdse {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw DomainError(std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace

std::string_view to_string(Dependence d) noexcept {
  switch (d) {
    case Dependence::kNegative: return "negative";
    case Dependence::kPositive: return "positive";
    case Dependence::kIndependent: return "independent";
  }
  return "?";
}

Dependence parse_dependence(std::string_view name) {
  if (name == "negative") return Dependence::kNegative;
  if (name == "positive") return Dependence::kPositive;
  if (name == "independent") return Dependence::kIndependent;
  throw DomainError("unknown dependence '" + std::string(name) + "'");
}

void GeneratorConfig::check() const {
  check_unit(alpha, "alpha");
  for (const StratumConfig* s : {&a, &b}) {
    if (s->population < 1) throw DomainError("population must be >= 1");
    check_unit(s->p1, "p1");
    check_unit(s->p2, "p2");
  }
  if (replicates < 1) throw DomainError("replicates must be >= 1");
}

CellProbabilities generator_probabilities(double alpha, double p1, double p2,
                                          Dependence dependence) {
  switch (dependence) {
    case Dependence::kNegative:
      return cell_probabilities(alpha, p1, p2);
    case Dependence::kIndependent:
      return cell_probabilities(0.0, p1, p2);
    case Dependence::kPositive: {
      check_unit(alpha, "alpha");
      check_unit(p1, "p1");
      check_unit(p2, "p2");
      CellProbabilities c;
      c.p11 = (1.0 - alpha) * p1 * p2 + alpha * p1;
      c.p10 = (1.0 - alpha) * p1 * (1.0 - p2);
      c.p01 = (1.0 - alpha) * (1.0 - p1) * p2;
      c.p00 = (1.0 - alpha) * (1.0 - p1) * (1.0 - p2) + alpha * (1.0 - p1);
      return c;
    }
  }
  return {};
}

DrawnTable draw_counts(const StratumConfig& stratum, double alpha,
                       Dependence dependence, PhiloxEngine& engine) {
  if (stratum.population < 1) throw DomainError("population must be >= 1");
  const CellProbabilities p =
      generator_probabilities(alpha, stratum.p1, stratum.p2, dependence);
  const auto x = draw_multinomial(engine, stratum.population, p.as_array());
  return {CellCounts{x[0], x[1], x[2]}, x[3]};
}

SummaryRow summarize(std::string quantity, double truth,
                     std::span<const double> values, int failures) {
  SummaryRow row;
  row.quantity = std::move(quantity);
  row.truth = truth;
  row.failures = failures;
  row.replicates = static_cast<int>(values.size());
  if (values.empty()) {
    row.expected = row.bias = row.relative_bias_pct = kNaN;
    row.bias_over_truth_pct = kNaN;
    row.variance = row.cv_pct = row.rmse = kNaN;
    return row;
  }
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  double sq_err = 0.0;
  for (double v : values) {
    ss += (v - mean) * (v - mean);
    sq_err += (v - truth) * (v - truth);
  }
  row.expected = mean;
  row.bias = mean - truth;
  row.relative_bias_pct = mean != 0.0 ? 100.0 * row.bias / mean : kNaN;
  row.bias_over_truth_pct = truth != 0.0 ? 100.0 * row.bias / truth : kNaN;
  row.variance = ss / n;
  row.cv_pct = 100.0 * std::sqrt(row.variance) / mean;
  row.rmse = std::sqrt(sq_err / n);
  row.bias_within_mc_error =
      std::abs(row.bias) <= 2.0 * std::sqrt(row.variance / n);
  return row;
}

GeneratorConfig study1_config(int replicates, std::uint64_t seed) {
  GeneratorConfig c;
  c.a = {50'000, 0.15, 0.05};
  c.b = {20'000, 0.15, 0.15};
  c.alpha = 0.05;
  c.dependence = Dependence::kNegative;
  c.replicates = replicates;
  c.seed = seed;
  return c;
}

namespace {

// Draws a replicate's survey, redrawing while either stratum has x11 = 0.
struct ReplicateDraw {
  std::optional<SurveyData> data;
  int redraws = 0;
};

ReplicateDraw draw_replicate(const GeneratorConfig& config, std::uint32_t grid,
                             std::uint32_t replicate, int max_redraws) {
  ReplicateDraw out;
  for (int attempt = 0; attempt <= max_redraws; ++attempt) {
    PhiloxEngine engine(config.seed, stream_id(grid, replicate),
                        static_cast<std::uint32_t>(attempt));
    const DrawnTable a = draw_counts(config.a, config.alpha, config.dependence, engine);
    const DrawnTable b = draw_counts(config.b, config.alpha, config.dependence, engine);
    if (a.counts.x11 >= 1 && b.counts.x11 >= 1) {
      out.data = make_survey(a.counts, b.counts);
      return out;
    }
    ++out.redraws;
  }
  return out;
}

struct ReplicateOutcome {
  bool drawn = false;
  bool fitted = false;
  bool fallback = false;
  int redraws = 0;
  std::array<double, 3> naive{};
  ModelParams params;
};

std::vector<ReplicateOutcome> simulate_replicates(const GeneratorConfig& config,
                                                  std::uint32_t grid,
                                                  const StudyOptions& options) {
  config.check();
  options.fit.check();
  std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(config.replicates));
  parallel_for(outcomes.size(), options.threads, [&](std::size_t r) {
    ReplicateOutcome& o = outcomes[r];
    ReplicateDraw d = draw_replicate(config, grid, static_cast<std::uint32_t>(r),
                                     options.max_redraws);
    o.redraws = d.redraws;
    if (!d.data) return;
    o.drawn = true;
    const double na = naive_estimate(d.data->counts_a());
    const double nb = naive_estimate(d.data->counts_b());
    o.naive = {na, nb, na + nb};
    try {
      const FitResult f = fit(*d.data, options.fit);
      o.params = f.params;
      o.fallback = f.reduced_fallback;
      o.fitted = true;
    } catch (const Error&) {
    }
  });
  return outcomes;
}

std::vector<SummaryRow> summarize_sizes(
    const std::vector<ReplicateOutcome>& outcomes, const GeneratorConfig& c,
    bool naive) {
  const std::array<const char*, 3> names = {"N_A", "N_B", "N"};
  const std::array<double, 3> truth = {
      static_cast<double>(c.a.population), static_cast<double>(c.b.population),
      static_cast<double>(c.a.population + c.b.population)};
  std::vector<SummaryRow> rows;
  for (std::size_t q = 0; q < 3; ++q) {
    std::vector<double> values;
    int failures = 0;
    for (const auto& o : outcomes) {
      const bool ok = naive ? o.drawn : o.fitted;
      if (!ok) {
        ++failures;
        continue;
      }
      values.push_back(naive ? o.naive[q]
                             : quantity_of(o.params, static_cast<Quantity>(q)));
    }
    rows.push_back(summarize(names[q], truth[q], values, failures));
  }
  return rows;
}

}  // namespace

StudyResult run_study(const GeneratorConfig& config,
                      const StudyOptions& options) {
  const auto outcomes = simulate_replicates(config, 0, options);
  StudyResult out;
  out.config = config;
  out.naive = summarize_sizes(outcomes, config, true);
  out.proposed = summarize_sizes(outcomes, config, false);
  const std::array<std::pair<Quantity, double>, 4> params = {
      {{Quantity::kAlpha, config.alpha},
       {Quantity::kP1, config.a.p1},
       {Quantity::kP2A, config.a.p2},
       {Quantity::kP2B, config.b.p2}}};
  for (const auto& [q, truth] : params) {
    std::vector<double> values;
    int failures = 0;
    for (const auto& o : outcomes) {
      if (o.fitted) {
        values.push_back(quantity_of(o.params, q));
      } else {
        ++failures;
      }
    }
    out.proposed.push_back(
        summarize(std::string(quantity_name(q)), truth, values, failures));
  }
  for (const auto& o : outcomes) {
    out.redraws += o.redraws;
    out.reduced_fallbacks += o.fallback ? 1 : 0;
    if (o.drawn && !o.fitted) ++out.fit_failures;
  }
  return out;
}

std::string_view to_string(VarianceSource v) noexcept {
  switch (v) {
    case VarianceSource::kHessian: return "hessian";
    case VarianceSource::kBootstrap: return "bootstrap";
    case VarianceSource::kZero: return "zero";
  }
  return "?";
}

VarianceSource parse_variance_source(std::string_view name) {
  if (name == "hessian") return VarianceSource::kHessian;
  if (name == "bootstrap") return VarianceSource::kBootstrap;
  if (name == "zero") return VarianceSource::kZero;
  throw DomainError("unknown variance source '" + std::string(name) + "'");
}

CoverageResult run_coverage(const GeneratorConfig& config,
                            const CoverageOptions& coverage,
                            const StudyOptions& options) {
  config.check();
  options.fit.check();
  struct Outcome {
    bool ok = false;
    int redraws = 0;
    std::array<VarianceIntervals, 1> intervals{};
  };
  std::vector<Outcome> outcomes(static_cast<std::size_t>(config.replicates));
  parallel_for(outcomes.size(), options.threads, [&](std::size_t r) {
    Outcome& o = outcomes[r];
    ReplicateDraw d = draw_replicate(config, 0, static_cast<std::uint32_t>(r),
                                     options.max_redraws);
    o.redraws = d.redraws;
    if (!d.data) return;
    try {
      const FitResult f = fit(*d.data, options.fit);
      double va = 0.0, vb = 0.0, vt = 0.0;
      if (coverage.source == VarianceSource::kHessian) {
        const HessianSE h = se_from_hessian(f, *d.data);
        va = h.covariance(index(Param::kNA), index(Param::kNA));
        vb = h.covariance(index(Param::kNB), index(Param::kNB));
        vt = h.se_total * h.se_total;
      } else if (coverage.source == VarianceSource::kBootstrap) {
        BootstrapOptions bo;
        bo.replicates = coverage.bootstrap_replicates;
        bo.seed = splitmix64(config.seed ^ splitmix64(r));
        bo.threads = 1;
        bo.fit = options.fit;
        const BootstrapResult b = bootstrap(*d.data, f, bo);
        va = b.se_of(Quantity::kNA) * b.se_of(Quantity::kNA);
        vb = b.se_of(Quantity::kNB) * b.se_of(Quantity::kNB);
        vt = b.se_of(Quantity::kTotal) * b.se_of(Quantity::kTotal);
      }
      o.intervals[0] = size_intervals(f, *d.data, va, vb, vt, coverage.level);
      o.ok = true;
    } catch (const Error&) {
    }
  });

  CoverageResult out;
  out.config = config;
  out.options = coverage;
  const std::array<double, 3> truth = {
      static_cast<double>(config.a.population),
      static_cast<double>(config.b.population),
      static_cast<double>(config.a.population + config.b.population)};
  const std::array<const char*, 3> names = {"N_A", "N_B", "N"};
  for (const char* style : {"standard", "lognormal"}) {
    const bool lognormal = std::string_view(style) == "lognormal";
    for (std::size_t q = 0; q < 3; ++q) {
      CoverageRow row;
      row.quantity = names[q];
      row.interval = style;
      int hits = 0;
      for (const Outcome& o : outcomes) {
        if (!o.ok) continue;
        const SizeIntervals& s =
            lognormal ? o.intervals[0].lognormal : o.intervals[0].wald;
        const Interval& iv = q == 0 ? s.n_a : (q == 1 ? s.n_b : s.total);
        row.mean_lower += iv.lower;
        row.mean_upper += iv.upper;
        hits += iv.contains(truth[q]) ? 1 : 0;
        ++row.replicates;
      }
      if (row.replicates > 0) {
        row.mean_lower /= row.replicates;
        row.mean_upper /= row.replicates;
        row.coverage = static_cast<double>(hits) / row.replicates;
      } else {
        row.mean_lower = row.mean_upper = row.coverage = kNaN;
      }
      out.rows.push_back(row);
    }
  }
  for (const Outcome& o : outcomes) {
    out.redraws += o.redraws;
    if (!o.ok) ++out.failures;
  }
  return out;
}

GeneratorConfig study2_config(int scenario, double grid_value, int replicates,
                              std::uint64_t seed) {
  if (scenario < 1 || scenario > 3) {
    throw DomainError("scenario must be 1, 2 or 3");
  }
  if (!(grid_value > 0.0 && grid_value < 1.0)) {
    throw DomainError("grid values must lie in (0, 1)");
  }
  GeneratorConfig c = study1_config(replicates, seed);
  switch (scenario) {
    case 1:
      c.b.p1 = grid_value;
      break;
    case 2:
      c.a.p1 = grid_value;
      break;
    case 3:
      c.b.p1 = grid_value;
      c.a.p2 = 0.15;
      c.b.p2 = 0.15;
      break;
  }
  return c;
}

std::vector<Study2Point> run_study2(int scenario, std::span<const double> grid,
                                    int replicates, std::uint64_t seed,
                                    const StudyOptions& options) {
  std::vector<GeneratorConfig> configs;
  for (double g : grid) configs.push_back(study2_config(scenario, g, replicates, seed));
  std::vector<Study2Point> points(grid.size());
  // Parallelism lives inside each grid point; streams are keyed by the grid
  // index so the sweep is reproducible point by point.
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto outcomes =
        simulate_replicates(configs[i], static_cast<std::uint32_t>(i), options);
    Study2Point& p = points[i];
    p.grid_value = grid[i];
    p.config = configs[i];
    p.proposed = summarize_sizes(outcomes, configs[i], false);
    p.naive = summarize_sizes(outcomes, configs[i], true);
    for (const auto& o : outcomes) {
      p.redraws += o.redraws;
      p.reduced_fallbacks += o.fallback ? 1 : 0;
      if (o.drawn && !o.fitted) ++p.fit_failures;
    }
  }
  return points;
}

std::vector<double> parse_grid(std::string_view spec) {
  auto number = [&](std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
      throw DomainError("invalid grid value '" + std::string(s) + "'");
    }
    return v;
  };
  std::vector<double> out;
  if (spec.find(':') != std::string_view::npos) {
    const auto c1 = spec.find(':');
    const auto c2 = spec.find(':', c1 + 1);
    if (c2 == std::string_view::npos) {
      throw DomainError("grid range must be start:stop:step");
    }
    const double start = number(spec.substr(0, c1));
    const double stop = number(spec.substr(c1 + 1, c2 - c1 - 1));
    const double step = number(spec.substr(c2 + 1));
    if (!(step > 0.0) || stop < start) {
      throw DomainError("grid range needs step > 0 and stop >= start");
    }
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (long i = 0; i < n; ++i) {
      out.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
    }
  } else {
    std::size_t begin = 0;
    while (begin <= spec.size()) {
      const auto comma = spec.find(',', begin);
      const auto piece = spec.substr(begin, comma == std::string_view::npos
                                                ? std::string_view::npos
                                                : comma - begin);
      out.push_back(number(piece));
      if (comma == std::string_view::npos) break;
      begin = comma + 1;
    }
  }
  for (double v : out) {
    if (!(v > 0.0 && v < 1.0)) throw DomainError("grid values must lie in (0, 1)");
  }
  return out;
}

}  // namespace depdse
