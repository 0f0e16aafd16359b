// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "depdse/error.hpp"
#include "depdse/model.hpp"
#include "test_data.hpp"

namespace depdse {
namespace {

using testing::quarter;
using testing::tiny;

void expect_cells(const CellProbabilities& c, double p11, double p10, double p01,
                  double p00) {
  EXPECT_NEAR(c.p11, p11, 1e-15);
  EXPECT_NEAR(c.p10, p10, 1e-15);
  EXPECT_NEAR(c.p01, p01, 1e-15);
  EXPECT_NEAR(c.p00, p00, 1e-15);
}

TEST(CellProbabilities, IndependenceFactorises) {
  expect_cells(cell_probabilities(0.0, 0.3, 0.2), 0.06, 0.24, 0.14, 0.56);
}

TEST(CellProbabilities, FullDependenceHasNoJointCells) {
  for (double p2 : {0.0, 0.2, 0.9, 1.0}) {
    expect_cells(cell_probabilities(1.0, 0.3, p2), 0.0, 0.3, 0.7, 0.0);
  }
}

TEST(CellProbabilities, StudyStratumA) {
  expect_cells(cell_probabilities(0.05, 0.15, 0.05), 0.007125, 0.142875, 0.082875,
               0.767125);
}

TEST(CellProbabilities, OutOfRangeRejected) {
  EXPECT_THROW(cell_probabilities(-0.1, 0.3, 0.2), DomainError);
  EXPECT_THROW(cell_probabilities(0.1, 1.3, 0.2), DomainError);
  EXPECT_THROW(cell_probabilities(0.1, 0.3, std::nan("")), DomainError);
}

TEST(CellProbabilities, NormalisedAndNegativelyDependent) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng), p1 = u(rng), p2 = u(rng);
    const CellProbabilities c = cell_probabilities(a, p1, p2);
    EXPECT_NEAR(c.sum(), 1.0, 1e-12);
    for (double v : c.as_array()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_LE(c.p11, p1 * p2 + 1e-15);
    EXPECT_LE(marginals_and_covariance(a, p1, p2).cov, 1e-15);
  }
  EXPECT_DOUBLE_EQ(cell_probabilities(0.0, 0.4, 0.3).p11, 0.4 * 0.3);
}

TEST(Marginals, Examples) {
  auto m = marginals_and_covariance(0.0, 0.3, 0.2);
  EXPECT_NEAR(m.p_y, 0.3, 1e-15);
  EXPECT_NEAR(m.p_z, 0.2, 1e-15);
  EXPECT_NEAR(m.cov, 0.0, 1e-15);
  m = marginals_and_covariance(1.0, 0.3, 0.2);
  EXPECT_NEAR(m.p_y, 0.3, 1e-15);
  EXPECT_NEAR(m.p_z, 0.7, 1e-15);
  EXPECT_NEAR(m.cov, -0.21, 1e-15);
  m = marginals_and_covariance(0.05, 0.15, 0.05);
  EXPECT_NEAR(m.cov, -0.006375, 1e-15);
}

TEST(Expand, QuarterOnePoint) {
  const Expansion e = expand({18916, 0.069, 0.1651, 0.1837}, quarter(1));
  EXPECT_NEAR(e.params.n_a, 9000.0 / 3118.0 * 18916.0, 1e-9);
  EXPECT_NEAR(e.params.n_a, 54605, 10.0);  // 54,600.4 exactly
  EXPECT_NEAR(e.params.p2a, 0.0119, 5e-5);
  EXPECT_FALSE(e.p2a_clamped);
}

TEST(Expand, SymmetricStrata) {
  const SurveyData d = make_survey({5, 6, 7}, {5, 6, 7});
  const ModelParams p = expand({100, 0.1, 0.2, 0.3}, d).params;
  EXPECT_DOUBLE_EQ(p.n_a, p.n_b);
  EXPECT_DOUBLE_EQ(p.p2a, p.p2b);
}

TEST(Expand, ZeroOverlapInA) {
  const ModelParams p = expand({100, 0.1, 0.2, 0.3}, make_survey({0, 6, 7}, {5, 6, 7})).params;
  EXPECT_EQ(p.p2a, 0.0);
}

TEST(Expand, ZeroOverlapInBRejected) {
  EXPECT_THROW(expand({100, 0.1, 0.2, 0.3}, make_survey({5, 6, 7}, {0, 6, 7})), DomainError);
}

TEST(Expand, ClampReported) {
  // p2_ratio = (50/1)(2/51) ~ 1.96, so p2B = 0.9 would push p2A past 1.
  const Expansion e = expand({100, 0.1, 0.2, 0.9}, make_survey({50, 1, 1}, {1, 1, 1}));
  EXPECT_TRUE(e.p2a_clamped);
  EXPECT_EQ(e.params.p2a, 1.0);
}

TEST(Expand, RestrictRoundTrip) {
  const ReducedParams r{123.5, 0.07, 0.21, 0.33};
  EXPECT_EQ(restrict_to_reduced(expand(r, quarter(2)).params), r);
}

const ModelParams kTinyTheta{20, 10, 0.1, 0.3, 0.2, 0.4};

TEST(LogLikelihood, TinyDatasetValue) {
  EXPECT_NEAR(log_likelihood(kTinyTheta, tiny()), -0.8990737367813539780680377, 1e-12);
}

TEST(LogLikelihood, SwapInvariant) {
  const SurveyData d = quarter(3);
  const ModelParams p{60000, 20000, 0.07, 0.18, 0.014, 0.185};
  EXPECT_NEAR(log_likelihood(p, d), log_likelihood(p.swapped(), d.swapped()),
              1e-9 * std::abs(log_likelihood(p, d)));
}

TEST(LogLikelihood, DivergesAsAlphaApproachesOne) {
  ModelParams p = kTinyTheta;
  double previous = log_likelihood(p, tiny());
  for (double gap : {1e-2, 1e-4, 1e-8, 1e-12}) {
    p.alpha = 1.0 - gap;
    const double v = log_likelihood(p, tiny());
    EXPECT_LT(v, previous);
    previous = v;
  }
  EXPECT_LT(previous, -50.0);
  p.alpha = 1.0;
  try {
    log_likelihood(p, tiny());
    FAIL();
  } catch (const EvaluationError& e) {
    EXPECT_NE(e.term().find("x11A"), std::string::npos);
  }
  EXPECT_EQ(log_likelihood_or_ninf(p, tiny()), -std::numeric_limits<double>::infinity());
}

TEST(LogLikelihood, BelowObservedRejected) {
  ModelParams p = kTinyTheta;
  p.n_a = 8.0;  // x0A = 9
  EXPECT_THROW(log_likelihood(p, tiny()), EvaluationError);
}

TEST(LogLikelihood, ZeroTimesLogZeroIsZero) {
  // x01 = 0 in both strata: p1 = 1 leaves only zero-weighted (1 - p1) logs.
  const SurveyData d = make_survey({2, 3, 0}, {1, 2, 0});
  const ModelParams p{5, 3, 0.1, 1.0, 0.2, 0.4};
  EXPECT_TRUE(std::isfinite(log_likelihood(p, d)));
}

// Random interior point for data `d`.
ModelParams random_point(std::mt19937_64& rng, const SurveyData& d) {
  std::uniform_real_distribution<double> prob(0.05, 0.9);
  std::uniform_real_distribution<double> extra(1.0, 60.0);
  return {static_cast<double>(d.counts_a().observed()) + extra(rng),
          static_cast<double>(d.counts_b().observed()) + extra(rng),
          prob(rng), prob(rng), prob(rng), prob(rng)};
}

SurveyData random_data(std::mt19937_64& rng) {
  std::uniform_int_distribution<Count> c(0, 20);
  auto counts = [&] { return CellCounts{c(rng) + 1, c(rng), c(rng)}; };
  const CellCounts a = counts();
  const CellCounts b = counts();
  return make_survey(a, b);
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(11);
  for (int dataset = 0; dataset < 10; ++dataset) {
    const SurveyData d = random_data(rng);
    for (int i = 0; i < 10; ++i) {
      const ModelParams p = random_point(rng, d);
      const Vector6 g = gradient(p, d);
      for (Param q : kAllParams) {
        const double h = 1e-6 * std::max(1.0, std::abs(p[q]));
        ModelParams up = p, down = p;
        up[q] += h;
        down[q] -= h;
        const double fd = (log_likelihood(up, d) - log_likelihood(down, d)) / (2 * h);
        EXPECT_LT(rel_err(g[index(q)], fd), 1e-6)
            << param_name(q) << " analytic " << g[index(q)] << " fd " << fd;
      }
    }
  }
}

TEST(Hessian, MatchesDifferencedGradientAndIsSymmetric) {
  std::mt19937_64 rng(13);
  for (int dataset = 0; dataset < 10; ++dataset) {
    const SurveyData d = random_data(rng);
    for (int i = 0; i < 10; ++i) {
      const ModelParams p = random_point(rng, d);
      const Matrix6 h = hessian(p, d);
      EXPECT_EQ(h, h.transpose());
      for (Param q : kAllParams) {
        const double step = 1e-5 * std::max(1.0, std::abs(p[q]));
        ModelParams up = p, down = p;
        up[q] += step;
        down[q] -= step;
        const Vector6 col = (gradient(up, d) - gradient(down, d)) / (2 * step);
        for (int r = 0; r < kNumParams; ++r) {
          EXPECT_LT(rel_err(h(r, index(q)), col[r]), 1e-5)
              << "entry (" << r << ", " << index(q) << ")";
        }
      }
    }
  }
}

TEST(Hessian, SizesDoNotInteract) {
  std::mt19937_64 rng(17);
  const SurveyData d = quarter(1);
  for (int i = 0; i < 20; ++i) {
    const Matrix6 h = hessian(random_point(rng, d), d);
    EXPECT_EQ(h(index(Param::kNA), index(Param::kNB)), 0.0);
  }
}

TEST(Hessian, SizeCurvatureAtTwiceObserved) {
  const SurveyData d = tiny();
  ModelParams p = kTinyTheta;
  p.n_a = 18.0;  // x0A = 9
  EXPECT_NEAR(hessian(p, d)(0, 0), -1.0 / 18.0, 1e-15);
}

TEST(Gradient, ListOneRateAtObservedSizes) {
  const SurveyData d = make_survey({2, 3, 0}, {1, 2, 0});
  const ModelParams p{5, 3, 0.1, 0.3, 0.2, 0.4};
  const Vector6 g = gradient(p, d);
  EXPECT_DOUBLE_EQ(g[index(Param::kP1)], (2 + 3 + 1 + 2) / 0.3);
  EXPECT_TRUE(std::isinf(g[index(Param::kNA)]));
}

TEST(IdentificationRatios, QuarterOne) {
  const IdentificationRatios r = identification_ratios(quarter(1));
  EXPECT_DOUBLE_EQ(r.size_ratio, 9000.0 / 3118.0);
  EXPECT_DOUBLE_EQ(r.p2_ratio, (100.0 / 534.0) * (3118.0 / 9000.0));
}

}  // namespace
}  // namespace depdse
