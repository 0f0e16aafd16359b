// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "depdse/error.hpp"
#include "depdse/tables.hpp"
#include "test_data.hpp"

namespace depdse {
namespace {

using testing::kQuarters;
using testing::quarter;

TEST(NaiveEstimate, QuarterOneStrata) {
  EXPECT_DOUBLE_EQ(naive_estimate({100, 8900, 3641}), 336690.0);
  EXPECT_EQ(std::lround(naive_estimate({534, 2584, 3780})), 25189);
}

TEST(NaiveEstimate, PooledQuarterOne) {
  const CellCounts pooled = quarter(1).pooled();
  EXPECT_EQ(pooled, (CellCounts{634, 11484, 7421}));
  EXPECT_EQ(std::lround(naive_estimate(pooled)), 153960);
}

TEST(NaiveEstimate, EqualCells) { EXPECT_DOUBLE_EQ(naive_estimate({10, 10, 10}), 40.0); }

TEST(NaiveEstimate, ZeroOverlapIsAnError) {
  try {
    naive_estimate({0, 5, 5});
    FAIL() << "expected an error";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("naive estimator undefined"), std::string::npos);
  }
}

TEST(NaiveEstimate, ScaleEquivariant) {
  for (const auto& q : kQuarters) {
    for (const CellCounts& c : q) {
      for (Count k : {1, 2, 7, 1000}) {
        const double scaled = naive_estimate(k * c);
        EXPECT_NEAR(scaled, k * naive_estimate(c), 1e-12 * scaled);
      }
    }
  }
}

TEST(NaiveEstimate, AtLeastObservedTotal) {
  for (Count x11 = 1; x11 < 6; ++x11) {
    for (Count x10 = 0; x10 < 6; ++x10) {
      for (Count x01 = 0; x01 < 6; ++x01) {
        const CellCounts c{x11, x10, x01};
        EXPECT_GE(naive_estimate(c), static_cast<double>(c.observed()));
      }
    }
  }
}

TEST(CHat, MatchesFourDecimalsAllQuarters) {
  const std::array<std::array<double, 2>, 4> expected = {
      {{0.0111, 0.1713}, {0.0148, 0.1771}, {0.0129, 0.1720}, {0.0186, 0.1655}}};
  for (int q = 0; q < 4; ++q) {
    for (int s = 0; s < 2; ++s) {
      EXPECT_NEAR(c_hat(kQuarters[q][s]), expected[q][s], 5e-5) << "quarter " << q + 1;
    }
  }
}

TEST(CHat, IgnoresListTwoOnlyCell) {
  EXPECT_DOUBLE_EQ(c_hat({3, 7, 0}), c_hat({3, 7, 1000}));
  EXPECT_THROW(c_hat({0, 0, 4}), DomainError);
}

TEST(PHat, EqualsCHatAtNaiveSize) {
  for (const auto& q : kQuarters) {
    for (const CellCounts& c : q) {
      EXPECT_NEAR(p_hat(c, naive_estimate(c)), c_hat(c), 1e-12);
    }
  }
}

TEST(LpBias, UnitPhiLeavesSecondTerm) {
  EXPECT_NEAR(lp_bias_approx(1000, 0.5, 0.2, 1.0), 4.0, 1e-12);
}

TEST(LpBias, FullListOneCoverageVanishes) {
  EXPECT_DOUBLE_EQ(lp_bias_approx(12345, 1.0, 0.3, 0.4), 0.0);
}

TEST(LpBias, TermByTermValue) {
  // 70000 (0.83)(0.9)/0.1 = 522900 and 10 (0.83)(0.998)/(0.17 * 0.1 * 0.02).
  EXPECT_NEAR(lp_bias_approx(70000, 0.17, 0.02, 0.1), 547262.94117647058824, 1e-8);
}

TEST(LpBias, RejectsOutOfDomain) {
  EXPECT_THROW(lp_bias_approx(100, 0.5, 0.2, 0.0), DomainError);
  EXPECT_THROW(lp_bias_approx(100, 0.5, 0.0, 1.0), DomainError);
  EXPECT_THROW(lp_bias_approx(100, 0.0, 0.2, 1.0), DomainError);
  EXPECT_THROW(lp_bias_approx(100, 0.5, 1.0, 1.0), DomainError);
}

TEST(Validate, AcceptsTwoStrata) {
  const std::vector<RawStratum> raw = {{"a", 100, 8900, 3641}, {"b", 534, 2584, 3780}};
  const SurveyData d = validate(raw);
  EXPECT_EQ(d.a.label, "a");
  EXPECT_EQ(d.counts_b(), (CellCounts{534, 2584, 3780}));
  EXPECT_TRUE(d.flags.empty());
}

TEST(Validate, ThreeStrataRejected) {
  const std::vector<RawStratum> raw = {{"a", 1, 1, 1}, {"b", 1, 1, 1}, {"c", 1, 1, 1}};
  try {
    validate(raw);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("exactly two strata required"), std::string::npos);
  }
}

TEST(Validate, NegativeCountNamesField) {
  const std::vector<RawStratum> raw = {{"a", -1, 1, 1}, {"b", 1, 1, 1}};
  try {
    validate(raw);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "x11A");
    EXPECT_NE(std::string(e.what()).find("x11A = -1"), std::string::npos);
  }
}

TEST(Validate, EmptyStratumRejected) {
  const std::vector<RawStratum> raw = {{"a", 1, 1, 1}, {"b", 0, 0, 0}};
  try {
    validate(raw);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "x0B");
  }
}

TEST(Validate, NoListOneRejected) {
  const std::vector<RawStratum> raw = {{"a", 0, 0, 5}, {"b", 1, 1, 1}};
  try {
    validate(raw);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "x1.A");
  }
}

TEST(Validate, ZeroOverlapFlaggedNotRejected) {
  const std::vector<RawStratum> raw = {{"a", 0, 4, 5}, {"b", 1, 1, 1}};
  const SurveyData d = validate(raw);
  ASSERT_EQ(d.flags.size(), 1u);
  EXPECT_NE(d.flags[0].find("x11A = 0"), std::string::npos);
}

TEST(Diagnose, QuarterOne) {
  const Diagnostics d = diagnose(quarter(1));
  EXPECT_NEAR(d.strata[0].c_hat, 0.0111, 5e-5);
  EXPECT_NEAR(d.strata[1].c_hat, 0.1713, 5e-5);
  ASSERT_TRUE(d.naive_pooled);
  EXPECT_EQ(std::lround(*d.naive_pooled), 153960);
  EXPECT_EQ(std::lround(*d.strata[1].naive), 25189);
}

TEST(Diagnose, ZeroOverlapStratumHasNoNaive) {
  const Diagnostics d = diagnose(make_survey({0, 4, 5}, {2, 3, 4}));
  EXPECT_FALSE(d.strata[0].naive);
  EXPECT_TRUE(d.strata[1].naive);
  EXPECT_TRUE(d.naive_pooled);
}

TEST(SurveyData, SwapExchangesStrata) {
  const SurveyData d = quarter(2);
  const SurveyData s = d.swapped();
  EXPECT_EQ(s.counts_a(), d.counts_b());
  EXPECT_EQ(s.b.label, d.a.label);
}

}  // namespace
}  // namespace depdse
