// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

// Constrained maximum likelihood for the two-stratum negative-dependence
// model. Population sizes are continuous and boxed by
//   x0s <= N_s <= naive_s,   alpha, p1, p2A, p2B in [0, 1].

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "depdse/error.hpp"
#include "depdse/model.hpp"
#include "depdse/tables.hpp"

namespace depdse {

inline constexpr std::uint64_t kDefaultSeed = 20180331;

enum class FitMode {
  kReduced,  ///< optimise (N_B, alpha, p1, p2B); N_A and p2A via `expand`
  kFull,     ///< optimise all six parameters
};

std::string_view to_string(FitMode mode) noexcept;
FitMode parse_fit_mode(std::string_view name);

struct FitOptions {
  FitMode mode = FitMode::kReduced;
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;
  int n_starts = 12;
  /// Only used for starts beyond the 12-point deterministic grid.
  std::uint64_t seed = kDefaultSeed;

  /// Throws DomainError on a non-positive tolerance or n_starts < 1.
  void check() const;
};

struct StartDiagnostics {
  ModelParams start;
  ModelParams end;
  double start_log_likelihood = 0.0;
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  double projected_gradient_norm = 0.0;
  std::string message;
};

struct FitResult {
  ModelParams params;
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  /// Parameters sitting on a bound of the natural-coordinate box.
  std::vector<Param> active_constraints;
  double n_hat_total = 0.0;
  FitMode mode = FitMode::kReduced;
  double projected_gradient_norm = 0.0;
  std::size_t best_start = 0;
  /// max relative deviation from N_A/N_B = x1.A/x1.B and the p2A identity;
  /// zero up to rounding in reduced mode.
  double identification_discrepancy = 0.0;
  std::vector<StartDiagnostics> per_start;
  /// Reduced mode was requested but no N_B keeps both sizes inside their
  /// boxes under N_A = (x1.A / x1.B) N_B; the fit ran in full mode.
  bool reduced_fallback = false;

  bool is_active(Param p) const noexcept;
};

/// Box for the population sizes: [x0s, naive_s].
struct SizeBounds {
  double lower_a = 0.0;
  double upper_a = 0.0;
  double lower_b = 0.0;
  double upper_b = 0.0;
};

/// Throws FitError (kUnfittable) when a stratum has x11 = 0.
SizeBounds size_bounds(const SurveyData& data);

class FitError : public Error {
 public:
  enum class Kind { kUnfittable, kNonConvergence };

  FitError(Kind kind, const std::string& message,
           std::vector<StartDiagnostics> diagnostics = {});
  Kind kind() const noexcept { return kind_; }
  const std::vector<StartDiagnostics>& diagnostics() const noexcept {
    return diagnostics_;
  }

 private:
  Kind kind_;
  std::vector<StartDiagnostics> diagnostics_;
};

/// Deterministic multi-start grid: population level in {midpoint, 1.2 x0,
/// 0.8 naive} (cycling fastest) crossed with alpha in {0.05, 0.02, 0.10,
/// 0.20}; p1 = pooled x1. / N, p2B from the x11B moment equation, N_A and
/// p2A via `expand`. Starts beyond twelve are drawn from the seeded stream.
/// When the reduced box is empty each stratum's size is placed on its own
/// box at the same levels and p2A comes from the x11A moment equation.
/// Every start lies inside the box with margin 1e-4 (relative for sizes).
std::vector<ModelParams> starting_points(const SurveyData& data,
                                         const FitOptions& options);

/// Best local maximum over `starting_points`. In reduced mode an empty
/// reduced box falls back to a full-mode fit (see FitResult::reduced_fallback).
FitResult fit(const SurveyData& data, const FitOptions& options = {});

/// Best local maximum over caller-supplied starts (projected onto the box).
FitResult fit_from(const SurveyData& data, const FitOptions& options,
                   std::span<const ModelParams> starts);

}  // namespace depdse
