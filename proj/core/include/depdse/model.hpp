// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

// Negative-dependence latent capture model for two strata.
//
// With probability alpha a unit's List-2 status is the complement of its
// List-1 status; otherwise the two latent Bernoulli captures (p1, p2) are
// independent. p1 is shared by both strata, p2 is stratum specific.

#pragma once

#include <array>
#include <string_view>

#include <Eigen/Core>

#include "depdse/tables.hpp"

namespace depdse {

enum class Param : int { kNA = 0, kNB, kAlpha, kP1, kP2A, kP2B };
inline constexpr int kNumParams = 6;
inline constexpr std::array<Param, kNumParams> kAllParams = {
    Param::kNA, Param::kNB, Param::kAlpha, Param::kP1, Param::kP2A,
    Param::kP2B};

std::string_view param_name(Param p) noexcept;
constexpr int index(Param p) noexcept { return static_cast<int>(p); }

using Vector6 = Eigen::Matrix<double, kNumParams, 1>;
using Matrix6 = Eigen::Matrix<double, kNumParams, kNumParams>;

/// Full parameter vector (N_A, N_B, alpha, p1, p2A, p2B).
struct ModelParams {
  double n_a = 0.0;
  double n_b = 0.0;
  double alpha = 0.0;
  double p1 = 0.0;
  double p2a = 0.0;
  double p2b = 0.0;

  Vector6 to_vector() const;
  static ModelParams from_vector(const Vector6& v);
  double total() const noexcept { return n_a + n_b; }
  double& operator[](Param p) noexcept;
  double operator[](Param p) const noexcept;
  /// Exchanges the roles of the two strata.
  ModelParams swapped() const noexcept;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct CellProbabilities {
  double p11 = 0.0;
  double p10 = 0.0;
  double p01 = 0.0;
  double p00 = 0.0;

  double sum() const noexcept { return p11 + p10 + p01 + p00; }
  std::array<double, 4> as_array() const noexcept { return {p11, p10, p01, p00}; }
};

/// Joint capture probabilities under negative dependence. The List-2-only
/// cell uses the additive bracket alpha + (1-alpha) p2.
CellProbabilities cell_probabilities(double alpha, double p1, double p2);

struct MarginalsCovariance {
  double p_y = 0.0;  ///< Pr(List 1)
  double p_z = 0.0;  ///< Pr(List 2)
  double cov = 0.0;  ///< Cov(Y, Z) = p11 - p_y p_z
};

MarginalsCovariance marginals_and_covariance(double alpha, double p1,
                                             double p2);

/// Four free coordinates once N_A and p2A are tied to N_B and p2B through
/// the shared List-1 rate and the x11 moment relation.
struct ReducedParams {
  double n_b = 0.0;
  double alpha = 0.0;
  double p1 = 0.0;
  double p2b = 0.0;

  friend bool operator==(const ReducedParams&, const ReducedParams&) = default;
};

/// N_A = size_ratio * N_B and p2A = p2_ratio * p2B, with
/// size_ratio = x1.A / x1.B and p2_ratio = (x11A / x11B)(x1.B / x1.A).
struct IdentificationRatios {
  double size_ratio = 1.0;
  double p2_ratio = 1.0;
};

/// Throws DomainError when x1.B = 0 or x11B = 0.
IdentificationRatios identification_ratios(const SurveyData& data);

struct Expansion {
  ModelParams params;
  /// p2_ratio * p2B exceeded 1 and p2A was clamped to 1.
  bool p2a_clamped = false;
};

Expansion expand(const ReducedParams& reduced, const SurveyData& data);

/// Drops N_A and p2A.
ReducedParams restrict_to_reduced(const ModelParams& params) noexcept;

/// Stirling-approximated log-likelihood (log n! ~ n log n - n) of both
/// strata. Zero counts multiplying a vanishing log argument contribute 0.
/// Throws EvaluationError naming the offending term otherwise, or when
/// N_s < x0s.
double log_likelihood(const ModelParams& params, const SurveyData& data);

/// Same value, but returns -infinity instead of throwing. Used inside
/// line searches.
double log_likelihood_or_ninf(const ModelParams& params,
                              const SurveyData& data) noexcept;

/// d logL / d(N_A, N_B, alpha, p1, p2A, p2B). At N_s = x0s the N_s
/// component is +infinity and the others are finite.
Vector6 gradient(const ModelParams& params, const SurveyData& data);

/// Second derivatives in the same order; symmetric by construction.
Matrix6 hessian(const ModelParams& params, const SurveyData& data);

}  // namespace depdse
