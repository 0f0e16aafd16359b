// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "depdse/inference.hpp"
#include "depdse/simulate.hpp"
#include "test_data.hpp"

namespace depdse {
namespace {

using testing::quarter;

TEST(HessianSE, QuarterOneParameters) {
  const SurveyData d = quarter(1);
  const FitResult f = fit(d);
  const HessianSE h = se_from_hessian(f, d);
  EXPECT_NEAR(h.se_of(Param::kAlpha), 0.0053, 0.5 * 0.0053);
  EXPECT_NEAR(h.se_of(Param::kP1), 0.0077, 0.5 * 0.0077);
  EXPECT_TRUE(h.fixed_at_bound.empty());
  for (Param p : kAllParams) EXPECT_GT(h.se_of(p), 0.0);
}

TEST(HessianSE, TotalAddsStratumVariances) {
  const SurveyData d = quarter(2);
  const HessianSE h = se_from_hessian(fit(d), d);
  const double va = h.covariance(0, 0), vb = h.covariance(1, 1);
  EXPECT_DOUBLE_EQ(h.se_total, std::sqrt(va + vb));
  EXPECT_DOUBLE_EQ(h.se_total_correlated,
                   std::sqrt(va + vb + 2.0 * h.covariance(0, 1)));
}

TEST(HessianSE, MatchesFiniteDifferenceInformation) {
  for (int q = 1; q <= 4; ++q) {
    const SurveyData d = quarter(q);
    const FitResult f = fit(d);
    const HessianSE h = se_from_hessian(f, d);
    Matrix6 fd;
    const Vector6 x = f.params.to_vector();
    for (int j = 0; j < kNumParams; ++j) {
      const double step = 1e-5 * std::max(1.0, std::abs(x[j]));
      Vector6 up = x, dn = x;
      up[j] += step;
      dn[j] -= step;
      fd.col(j) = (gradient(ModelParams::from_vector(up), d) -
                   gradient(ModelParams::from_vector(dn), d)) /
                  (2.0 * step);
    }
    const Matrix6 sym = 0.5 * (fd + fd.transpose());
    const Matrix6 cov = (-sym).inverse();
    for (int j = 0; j < kNumParams; ++j) {
      EXPECT_NEAR(h.se[j], std::sqrt(cov(j, j)), 0.01 * h.se[j]) << q << " " << j;
    }
  }
}

TEST(HessianSE, SimulatedDatasetFinitePositive) {
  const GeneratorConfig c = study1_config();
  PhiloxEngine engine(7, 0);
  DrawnTable a = draw_counts(c.a, c.alpha, c.dependence, engine);
  DrawnTable b = draw_counts(c.b, c.alpha, c.dependence, engine);
  const SurveyData d = make_survey(a.counts, b.counts);
  const HessianSE h = se_from_hessian(fit(d), d);
  for (Param p : kAllParams) {
    EXPECT_TRUE(std::isfinite(h.se_of(p)));
    EXPECT_GT(h.se_of(p), 0.0);
  }
}

TEST(HessianSE, BoundParameterIsFlagged) {
  // Cell-level independence: alpha estimates at its lower bound.
  const SurveyData d = make_survey({400, 1600, 600}, {300, 700, 1200});
  FitOptions o;
  o.mode = FitMode::kFull;
  const FitResult f = fit(d, o);
  if (f.active_constraints.empty()) GTEST_SKIP() << "no active bound";
  try {
    const HessianSE h = se_from_hessian(f, d);
    ASSERT_FALSE(h.fixed_at_bound.empty());
    for (Param p : h.fixed_at_bound) EXPECT_TRUE(std::isnan(h.se_of(p)));
  } catch (const InferenceError&) {
    SUCCEED();
  }
}

BootstrapOptions small_bootstrap(int b, unsigned threads) {
  BootstrapOptions o;
  o.replicates = b;
  o.seed = 99;
  o.threads = threads;
  return o;
}

TEST(Bootstrap, DeterministicForFixedSeed) {
  const SurveyData d = quarter(1);
  const FitResult f = fit(d);
  const BootstrapResult a = bootstrap(d, f, small_bootstrap(2, 1));
  const BootstrapResult b = bootstrap(d, f, small_bootstrap(2, 1));
  ASSERT_EQ(a.replicates.size(), 2u);
  EXPECT_EQ(a.replicates, b.replicates);
}

TEST(Bootstrap, ThreadCountInvariant) {
  const SurveyData d = quarter(4);
  const FitResult f = fit(d);
  const BootstrapResult a = bootstrap(d, f, small_bootstrap(8, 1));
  const BootstrapResult b = bootstrap(d, f, small_bootstrap(8, 3));
  EXPECT_EQ(a.replicates, b.replicates);
  EXPECT_EQ(a.se, b.se);
}

TEST(Bootstrap, SeUsesOneOverB) {
  const SurveyData d = quarter(2);
  const BootstrapResult r = bootstrap(d, fit(d), small_bootstrap(10, 1));
  ASSERT_EQ(r.successful, 10);
  for (int q = 0; q < kNumQuantities; ++q) {
    double m = 0.0, ss = 0.0;
    for (const auto& row : r.replicates) m += row[q];
    m /= 10.0;
    for (const auto& row : r.replicates) ss += (row[q] - m) * (row[q] - m);
    EXPECT_NEAR(r.mean[q], m, 1e-12 * std::abs(m));
    EXPECT_NEAR(r.se[q], std::sqrt(ss / 10.0), 1e-9 * r.se[q] + 1e-300);
  }
  for (const auto& row : r.replicates) {
    EXPECT_DOUBLE_EQ(row[static_cast<int>(Quantity::kTotal)],
                     row[0] + row[1]);
  }
}

TEST(Bootstrap, ImputedTableAtObservedSize) {
  const CellCounts c{30, 50, 20};
  PhiloxEngine engine(1, 2);
  for (int i = 0; i < 200; ++i) {
    const auto t = draw_imputed_table(engine, c, 100.0);
    EXPECT_EQ(t[3], 0);
    EXPECT_EQ(t[0] + t[1] + t[2], 100);
  }
  const auto t = draw_imputed_table(engine, c, 150.4);
  EXPECT_EQ(t[0] + t[1] + t[2] + t[3], 150);
}

TEST(Bootstrap, OptionsValidated) {
  const SurveyData d = quarter(1);
  const FitResult f = fit(d);
  EXPECT_THROW(bootstrap(d, f, small_bootstrap(0, 1)), DomainError);
}

TEST(Interval, ZeroVarianceCollapses) {
  const Interval i = lognormal_interval(500.0, 200.0, 0.0);
  EXPECT_DOUBLE_EQ(i.lower, 500.0);
  EXPECT_DOUBLE_EQ(i.upper, 500.0);
}

TEST(Interval, Ordering) {
  for (double s2 : {1.0, 100.0, 1e4, 1e6, 1e9}) {
    const Interval i = lognormal_interval(500.0, 200.0, s2);
    EXPECT_LT(i.lower, 500.0);
    EXPECT_GT(i.upper, 500.0);
    EXPECT_GE(i.lower, 200.0);
  }
}

TEST(Interval, ClosedForm) {
  const double c = std::exp(1.96 * std::sqrt(std::log(1.0 + 2500.0 / (300.0 * 300.0))));
  const Interval i = lognormal_interval(500.0, 200.0, 2500.0);
  EXPECT_DOUBLE_EQ(i.lower, 200.0 + 300.0 / c);
  EXPECT_DOUBLE_EQ(i.upper, 200.0 + 300.0 * c);
  const Interval w = wald_interval(500.0, 2500.0);
  EXPECT_DOUBLE_EQ(w.lower, 500.0 - 1.96 * 50.0);
  EXPECT_DOUBLE_EQ(w.upper, 500.0 + 1.96 * 50.0);
}

TEST(Interval, Errors) {
  EXPECT_THROW(lognormal_interval(200.0, 200.0, 1.0), DomainError);
  EXPECT_THROW(lognormal_interval(100.0, 200.0, 1.0), DomainError);
  EXPECT_THROW(lognormal_interval(300.0, 200.0, -1.0), DomainError);
}

TEST(Interval, NormalQuantile) {
  EXPECT_EQ(normal_quantile(0.95), 1.96);
  EXPECT_NEAR(normal_quantile(0.90), 1.6448536269514722, 1e-12);
  EXPECT_THROW(normal_quantile(1.0), DomainError);
  EXPECT_THROW(normal_quantile(0.0), DomainError);
}

TEST(Assess, HessianOnlyBuildsIntervals) {
  const SurveyData d = quarter(1);
  const FitResult f = fit(d);
  const UncertaintyReport r =
      assess_uncertainty(d, f, SeMethod::kHessian, small_bootstrap(1, 1));
  ASSERT_TRUE(r.hessian);
  ASSERT_TRUE(r.hessian_intervals);
  EXPECT_FALSE(r.bootstrap);
  EXPECT_TRUE(r.hessian_intervals->lognormal.total.contains(f.n_hat_total));
  EXPECT_TRUE(r.hessian_intervals->wald.n_a.contains(f.params.n_a));
}

TEST(Assess, ParseMethod) {
  EXPECT_EQ(parse_se_method("both"), SeMethod::kBoth);
  EXPECT_THROW(parse_se_method("jackknife"), DomainError);
}

}  // namespace
}  // namespace depdse
