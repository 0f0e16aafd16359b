// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

// Monte-Carlo studies of the naive and dependent estimators under the
// latent capture models.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "depdse/inference.hpp"
#include "depdse/mle.hpp"
#include "depdse/model.hpp"
#include "depdse/random.hpp"
#include "depdse/tables.hpp"

namespace depdse {

enum class Dependence { kNegative, kPositive, kIndependent };
std::string_view to_string(Dependence d) noexcept;
Dependence parse_dependence(std::string_view name);

struct StratumConfig {
  Count population = 0;
  double p1 = 0.0;
  double p2 = 0.0;
};

struct GeneratorConfig {
  StratumConfig a;
  StratumConfig b;
  double alpha = 0.0;
  Dependence dependence = Dependence::kNegative;
  int replicates = 500;
  std::uint64_t seed = kDefaultSeed;

  /// Throws DomainError for probabilities outside [0, 1], N < 1 or
  /// replicates < 1.
  void check() const;
};

/// Cell probabilities of the selected generator. Positive dependence copies
/// the List-1 status with probability alpha; kIndependent ignores alpha.
CellProbabilities generator_probabilities(double alpha, double p1, double p2,
                                          Dependence dependence);

struct DrawnTable {
  CellCounts counts;
  Count x00 = 0;
};

DrawnTable draw_counts(const StratumConfig& stratum, double alpha,
                       Dependence dependence, PhiloxEngine& engine);

/// Moments of one estimator over the successful replicates. Variance uses
/// the 1/R convention so that rmse^2 = bias^2 + variance. Relative bias is
/// scaled by the mean estimate, 100 (E - truth) / E; the truth-scaled
/// version is kept alongside.
struct SummaryRow {
  std::string quantity;
  double truth = 0.0;
  double expected = 0.0;
  double bias = 0.0;
  double relative_bias_pct = 0.0;
  double bias_over_truth_pct = 0.0;
  double variance = 0.0;
  double cv_pct = 0.0;
  double rmse = 0.0;
  /// |bias| <= 2 SD / sqrt(R): indistinguishable from zero at this R.
  bool bias_within_mc_error = false;
  int replicates = 0;
  int failures = 0;
};

SummaryRow summarize(std::string quantity, double truth,
                     std::span<const double> values, int failures = 0);

struct StudyOptions {
  unsigned threads = 0;
  FitOptions fit;
  /// Redraw budget per replicate when a stratum draws x11 = 0.
  int max_redraws = 1000;
};

struct StudyResult {
  GeneratorConfig config;
  std::vector<SummaryRow> naive;     ///< N_A, N_B, N
  std::vector<SummaryRow> proposed;  ///< N_A, N_B, N, alpha, p1, p2A, p2B
  int redraws = 0;
  int fit_failures = 0;
  /// Fits that fell back from reduced to full mode (empty reduced box).
  int reduced_fallbacks = 0;
};

/// Study 1 population: N_A = 50,000, N_B = 20,000,
/// alpha = 0.05, p1 = 0.15, p2A = 0.05, p2B = 0.15.
GeneratorConfig study1_config(int replicates = 500,
                              std::uint64_t seed = kDefaultSeed);

/// Draws `replicates` stratified tables, fits both estimators to each, and
/// summarises. Deterministic given (config, seed) for any thread count.
StudyResult run_study(const GeneratorConfig& config,
                      const StudyOptions& options = {});

inline StudyResult run_study1(const GeneratorConfig& config,
                              const StudyOptions& options = {}) {
  return run_study(config, options);
}

enum class VarianceSource { kHessian, kBootstrap, kZero };
std::string_view to_string(VarianceSource v) noexcept;
VarianceSource parse_variance_source(std::string_view name);

struct CoverageOptions {
  VarianceSource source = VarianceSource::kHessian;
  int bootstrap_replicates = 200;
  double level = 0.95;
};

struct CoverageRow {
  std::string quantity;  ///< N_A, N_B, N
  std::string interval;  ///< "standard" or "lognormal"
  double mean_lower = 0.0;
  double mean_upper = 0.0;
  double coverage = 0.0;
  int replicates = 0;
};

struct CoverageResult {
  GeneratorConfig config;
  CoverageOptions options;
  std::vector<CoverageRow> rows;
  int redraws = 0;
  /// Replicates whose fit or variance estimate failed.
  int failures = 0;
};

CoverageResult run_coverage(const GeneratorConfig& config,
                            const CoverageOptions& coverage,
                            const StudyOptions& options = {});

/// Assumption-violation sweeps over the List-1 capture probability.
/// Scenario 1: p1A = 0.15, p1B = g, p2A = 0.05, p2B = 0.15.
/// Scenario 2: p1A = g, p1B = 0.15, p2A = 0.05, p2B = 0.15.
/// Scenario 3: p1A = 0.15, p1B = g, p2A = p2B = 0.15.
GeneratorConfig study2_config(int scenario, double grid_value, int replicates,
                              std::uint64_t seed);

struct Study2Point {
  double grid_value = 0.0;
  GeneratorConfig config;
  std::vector<SummaryRow> proposed;  ///< N_A, N_B, N
  std::vector<SummaryRow> naive;     ///< N_A, N_B, N
  int redraws = 0;
  int fit_failures = 0;
  /// Fits that fell back from reduced to full mode (empty reduced box).
  int reduced_fallbacks = 0;
};

std::vector<Study2Point> run_study2(int scenario, std::span<const double> grid,
                                    int replicates, std::uint64_t seed,
                                    const StudyOptions& options = {});

/// Parses "start:stop:step" (inclusive) or a comma-separated list.
std::vector<double> parse_grid(std::string_view spec);

}  // namespace depdse
