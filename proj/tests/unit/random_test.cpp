// Copyright 2026 The depdse Authors.
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "depdse/model.hpp"
#include "depdse/parallel.hpp"
#include "depdse/random.hpp"

namespace depdse {
namespace {

// Known-answer vectors published with the Random123 library.
TEST(Philox, KnownAnswers) {
  EXPECT_EQ(Philox4x32::block({0, 0, 0, 0}, {0, 0}),
            (Philox4x32::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                              {0xffffffff, 0xffffffff}),
            (Philox4x32::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                              {0xa4093822, 0x299f31d0}),
            (Philox4x32::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(PhiloxEngine, StreamsAreReproducibleAndDistinct) {
  PhiloxEngine a(42, 7), b(42, 7), c(42, 8), d(43, 7), e(42, 7, 1);
  std::vector<std::uint32_t> va, vb, vc, vd, ve;
  for (int i = 0; i < 64; ++i) {
    va.push_back(a());
    vb.push_back(b());
    vc.push_back(c());
    vd.push_back(d());
    ve.push_back(e());
  }
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, vc);
  EXPECT_NE(va, vd);
  EXPECT_NE(va, ve);
}

TEST(PhiloxEngine, UniformInUnitInterval) {
  PhiloxEngine e(1, 2);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = e.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(StreamId, PacksBothLevels) {
  EXPECT_EQ(stream_id(1, 2), (std::uint64_t{1} << 32) | 2u);
  EXPECT_NE(stream_id(0, 1), stream_id(1, 0));
}

TEST(Multinomial, TotalsExact) {
  PhiloxEngine e(3, 0);
  for (std::int64_t n : {0, 1, 5, 1000, 123457}) {
    const auto x = draw_multinomial(e, n, {0.1, 0.2, 0.3, 0.4});
    EXPECT_EQ(std::accumulate(x.begin(), x.end(), std::int64_t{0}), n);
  }
}

TEST(Multinomial, ZeroCellsStayEmpty) {
  PhiloxEngine e(3, 1);
  for (int i = 0; i < 200; ++i) {
    const auto x = draw_multinomial(e, 1000, cell_probabilities(1.0, 0.3, 0.5).as_array());
    EXPECT_EQ(x[0], 0);
    EXPECT_EQ(x[3], 0);
  }
  const auto y = draw_multinomial(e, 50, {0.0, 0.0, 2.0, 0.0});
  EXPECT_EQ(y[2], 50);
}

TEST(Multinomial, MatchesCellProbabilities) {
  const CellProbabilities p = cell_probabilities(0.2, 0.35, 0.25);
  const auto probs = p.as_array();
  std::array<double, 4> totals{};
  PhiloxEngine e(99, 0);
  const std::int64_t per_draw = 50;
  const int draws = 4000;  // 2e5 trials
  for (int i = 0; i < draws; ++i) {
    const auto x = draw_multinomial(e, per_draw, probs);
    for (int k = 0; k < 4; ++k) totals[k] += static_cast<double>(x[k]);
  }
  const double n = static_cast<double>(per_draw) * draws;
  double chi2 = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double expected = n * probs[k];
    const double sd = std::sqrt(n * probs[k] * (1.0 - probs[k]));
    EXPECT_LT(std::abs(totals[k] - expected), 4.0 * sd) << "cell " << k;
    chi2 += (totals[k] - expected) * (totals[k] - expected) / expected;
  }
  const boost::math::chi_squared dist(3);
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 1e-4);
}

TEST(ResolveThreads, ExplicitWinsEnvironmentOtherwise) {
  EXPECT_EQ(resolve_threads(3), 3u);
  ::setenv(kThreadsEnvVar, "2", 1);
  EXPECT_EQ(resolve_threads(0), 2u);
  ::setenv(kThreadsEnvVar, "junk", 1);
  EXPECT_GE(resolve_threads(0), 1u);
  ::unsetenv(kThreadsEnvVar);
  EXPECT_GE(resolve_threads(0), 1u);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  for (unsigned threads : {1u, 2u, 5u}) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  parallel_for(0, 4, [](std::size_t) { FAIL(); });
}

TEST(ParallelFor, RethrowsTaskError) {
  EXPECT_THROW(parallel_for(100, 3,
                            [](std::size_t i) {
                              if (i == 37) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

}  // namespace
}  // namespace depdse
