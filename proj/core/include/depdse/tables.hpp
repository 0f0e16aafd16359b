// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

// Stratified dual-list contingency data: ingestion, validation, the
// Lincoln-Petersen estimator and dependence diagnostics.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace depdse {

using Count = std::int64_t;

/// Observed cells of one stratum's 2x2 table. List 1 is the row list,
/// List 2 the column list; x00 is never observed.
struct CellCounts {
  Count x11 = 0;  ///< in both lists
  Count x10 = 0;  ///< List 1 only
  Count x01 = 0;  ///< List 2 only

  constexpr Count observed() const noexcept { return x11 + x10 + x01; }
  constexpr Count list1() const noexcept { return x11 + x10; }
  constexpr Count list2() const noexcept { return x11 + x01; }

  friend constexpr CellCounts operator+(const CellCounts& a,
                                        const CellCounts& b) noexcept {
    return {a.x11 + b.x11, a.x10 + b.x10, a.x01 + b.x01};
  }
  friend constexpr bool operator==(const CellCounts&,
                                   const CellCounts&) = default;
};

CellCounts operator*(Count k, const CellCounts& c) noexcept;

struct Stratum {
  std::string label;
  CellCounts counts;
};

/// Exactly two strata, A and B. Construct through `validate`.
struct SurveyData {
  Stratum a;
  Stratum b;
  /// Non-fatal conditions found at ingestion, e.g. "x11A = 0".
  std::vector<std::string> flags;

  const CellCounts& counts_a() const noexcept { return a.counts; }
  const CellCounts& counts_b() const noexcept { return b.counts; }
  CellCounts pooled() const noexcept { return a.counts + b.counts; }
  /// Same data with the strata swapped (flags re-derived).
  SurveyData swapped() const;
};

/// Unchecked counts as read from a file or the command line.
struct RawStratum {
  std::string label;
  std::int64_t x11 = 0;
  std::int64_t x10 = 0;
  std::int64_t x01 = 0;
};

/// Checks the two-stratum layout and count domains. Throws ValidationError
/// naming the field (e.g. "x10B"). Strata with x11 = 0 are accepted and
/// flagged.
SurveyData validate(std::span<const RawStratum> strata);

/// Convenience overload for programmatic construction.
SurveyData make_survey(const CellCounts& a, const CellCounts& b,
                       std::string label_a = "A", std::string label_b = "B");

/// Empirical Pr(List 2 | List 1) = x11 / (x11 + x10).
double c_hat(const CellCounts& counts);

/// Empirical Pr(List 2 | not List 1) = x01 / (N - x1.) for a population
/// size N >= x0.
double p_hat(const CellCounts& counts, double population);

/// Lincoln-Petersen estimate x1. * x.1 / x11, unrounded.
double naive_estimate(const CellCounts& counts);

/// Approximate bias of the Lincoln-Petersen estimator under a behavioural
/// response effect `phi`:
///   N(1-p1.)(1-phi)/phi + (1/phi)(1-p1.)(1-phi p)/(p1. phi p).
double lp_bias_approx(double population, double p1dot, double p, double phi);

struct StratumDiagnostics {
  std::string label;
  double c_hat = 0.0;
  /// Pr(List 2 | not List 1) evaluated at `p_hat_population`.
  double p_hat = 0.0;
  double p_hat_population = 0.0;
  std::optional<double> naive;  ///< empty when x11 = 0
};

struct Diagnostics {
  std::array<StratumDiagnostics, 2> strata;
  std::optional<double> naive_pooled;
};

/// Per-stratum c-hat, p-hat and naive estimates plus the pooled naive
/// estimate. p-hat is evaluated at `populations` when given, otherwise at the
/// naive size (where it coincides with c-hat by construction) or, when x11 =
/// 0, left at 0.
Diagnostics diagnose(const SurveyData& data,
                     std::optional<std::array<double, 2>> populations = {});

}  // namespace depdse
