// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

// Uncertainty for fitted estimates: observed-information standard errors,
// the imputed parametric bootstrap, and log-normal intervals for population
// sizes.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "depdse/error.hpp"
#include "depdse/mle.hpp"
#include "depdse/model.hpp"
#include "depdse/random.hpp"

namespace depdse {

/// Inverse of the observed information on the full six-parameter model.
struct HessianSE {
  /// NaN for parameters fixed at a bound.
  Vector6 se = Vector6::Zero();
  /// sqrt(Var N_A + Var N_B): the strata are sampled independently, so this
  /// is the total used for intervals.
  double se_total = 0.0;
  /// sqrt(Var N_A + Var N_B + 2 Cov(N_A, N_B)); reported for comparison
  /// because the shared alpha and p1 correlate the two estimates.
  double se_total_correlated = 0.0;
  Matrix6 covariance = Matrix6::Zero();
  std::vector<Param> fixed_at_bound;

  double se_of(Param p) const noexcept { return se[index(p)]; }
};

class InferenceError : public Error {
 public:
  using Error::Error;
};

/// Throws InferenceError when the information restricted to the free
/// parameters is singular or indefinite.
HessianSE se_from_hessian(const FitResult& fit, const SurveyData& data);

/// Quantities tracked across bootstrap replicates.
enum class Quantity : int { kNA = 0, kNB, kTotal, kAlpha, kP1, kP2A, kP2B };
inline constexpr int kNumQuantities = 7;
inline constexpr std::array<Quantity, kNumQuantities> kAllQuantities = {
    Quantity::kNA, Quantity::kNB,  Quantity::kTotal, Quantity::kAlpha,
    Quantity::kP1, Quantity::kP2A, Quantity::kP2B};
std::string_view quantity_name(Quantity q) noexcept;
double quantity_of(const ModelParams& p, Quantity q) noexcept;

using QuantityVector = std::array<double, kNumQuantities>;

struct BootstrapOptions {
  int replicates = 500;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;  ///< 0: DEPDSE_THREADS or hardware concurrency
  int max_retries = 10;
  double max_failure_fraction = 0.05;
  FitOptions fit;
};

struct BootstrapResult {
  /// One row per replicate; NaN rows for failed replicates.
  std::vector<QuantityVector> replicates;
  QuantityVector mean{};
  /// sqrt((1/B) sum (x_b - mean)^2) over successful replicates.
  QuantityVector se{};
  int requested = 0;
  int successful = 0;
  int failed = 0;
  /// Fresh draws taken after a replicate's fit failed.
  int retries = 0;
  std::vector<std::string> failure_log;

  double mean_of(Quantity q) const noexcept { return mean[static_cast<int>(q)]; }
  double se_of(Quantity q) const noexcept { return se[static_cast<int>(q)]; }
};

class BootstrapError : public Error {
 public:
  BootstrapError(const std::string& message, BootstrapResult partial);
  const BootstrapResult& partial() const noexcept { return partial_; }

 private:
  BootstrapResult partial_;
};

/// Multinomial table of size round(N_s) with cell probabilities
/// (x11, x10, x01, N_s - x0s) / N_s for one stratum.
std::array<std::int64_t, 4> draw_imputed_table(PhiloxEngine& engine,
                                               const CellCounts& counts,
                                               double n_hat);

/// Imputed bootstrap: per replicate and stratum, draw a table around the
/// fitted size, refit, and record the estimates. A failed refit is retried
/// with a fresh draw up to `max_retries` times; the replicate is then
/// recorded as failed. Throws BootstrapError when more than
/// `max_failure_fraction` of replicates fail.
BootstrapResult bootstrap(const SurveyData& data, const FitResult& fit,
                          const BootstrapOptions& options);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double v) const noexcept { return lower <= v && v <= upper; }
};

/// Two-sided normal quantile; exactly 1.96 for level 0.95.
double normal_quantile(double level);

/// x0 + (N - x0) / C, x0 + (N - x0) C with
/// C = exp(z sqrt(log(1 + sigma2 / (N - x0)^2))). Throws DomainError when
/// n_hat <= x0 or sigma2 < 0.
Interval lognormal_interval(double n_hat, double x0, double sigma2,
                            double level = 0.95);

/// n_hat -/+ z sigma.
Interval wald_interval(double n_hat, double sigma2, double level = 0.95);

enum class SeMethod { kHessian, kBootstrap, kBoth };
std::string_view to_string(SeMethod m) noexcept;
SeMethod parse_se_method(std::string_view name);

struct SizeIntervals {
  Interval n_a;
  Interval n_b;
  Interval total;
};

struct VarianceIntervals {
  SizeIntervals lognormal;
  SizeIntervals wald;
};

struct UncertaintyReport {
  double level = 0.95;
  SeMethod method = SeMethod::kHessian;
  std::optional<HessianSE> hessian;
  /// Set when the Hessian path was requested but the information was
  /// singular or indefinite.
  std::optional<std::string> hessian_error;
  std::optional<BootstrapResult> bootstrap;
  std::optional<VarianceIntervals> hessian_intervals;
  std::optional<VarianceIntervals> bootstrap_intervals;
};

/// Intervals around the fitted sizes for the given variances.
VarianceIntervals size_intervals(const FitResult& fit, const SurveyData& data,
                                 double var_a, double var_b, double var_total,
                                 double level);

/// Runs the requested SE paths and builds intervals. With kBoth a failing
/// Hessian is recorded in `hessian_error`; with kHessian alone it throws.
UncertaintyReport assess_uncertainty(const SurveyData& data,
                                     const FitResult& fit, SeMethod method,
                                     const BootstrapOptions& options,
                                     double level = 0.95);

}  // namespace depdse
