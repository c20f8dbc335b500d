#include <gtest/gtest.h>

#include <cmath>

#include "disperse/complexity.hpp"
#include "disperse/types.hpp"

using namespace disperse;

TEST(Rmps, TimeDomain)
{
  EXPECT_EQ(rmps_td(273), 408.0);
  EXPECT_EQ(rmps_td(3), 3.0);
  EXPECT_EQ(rmps_td(393), 588.0);
  EXPECT_EQ(rmps_td(1), 0.0);
  EXPECT_THROW(rmps_td(0), ParameterError);
  EXPECT_THROW(rmps_td(-3), ParameterError);
  EXPECT_THROW(rmps_td(272), ParameterError);
}

TEST(Rmps, Clustered)
{
  EXPECT_EQ(rmps_clustered(26), 78.0);
  EXPECT_EQ(rmps_clustered(12), 36.0);
  EXPECT_EQ(rmps_clustered(1), 3.0);
  EXPECT_THROW(rmps_clustered(0), ParameterError);
}

TEST(Rmps, FrequencyDomain)
{
  EXPECT_NEAR(rmps_fd(512, 256), 59.77, 5e-3);
  EXPECT_EQ(std::lround(rmps_fd(512)), 60);
  EXPECT_EQ(rmps_fd(2, 1), 6.0);
  EXPECT_NEAR(rmps_fd(2048, 1024), 71.93, 5e-3);
  EXPECT_EQ(rmps_fd(2048), rmps_fd(2048, 1024));
  EXPECT_THROW(rmps_fd(512, 512), ParameterError);
  EXPECT_THROW(rmps_fd(512, 0), ParameterError);
  EXPECT_THROW(rmps_fd(500, 250), ParameterError);
}

TEST(Rmps, PaperSavings)
{
  EXPECT_NEAR(complexity_saving(36, 78), 0.538, 5e-4);
  EXPECT_NEAR(complexity_saving(36, std::round(rmps_fd(512))), 0.40, 1e-12);
  EXPECT_THROW(complexity_saving(1, 0), ParameterError);
}

TEST(Rmps, StrictlyIncreasing)
{
  for (long n = 3; n < 2001; n += 2) { EXPECT_LT(rmps_td(n - 2), rmps_td(n)); }
  for (long c = 2; c < 1000; ++c) { EXPECT_LT(rmps_clustered(c - 1), rmps_clustered(c)); }
}

TEST(Rmps, FdUnimodalForFixedMemory)
{
  // overlap pinned to a channel memory; F ranges over the feasible powers of two
  for (long memory : {32L, 64L, 100L, 272L, 392L, 1000L}) {
    std::vector<double> cost;
    for (long F = 64; F <= 65536; F *= 2) {
      if (F > memory) { cost.push_back(rmps_fd(F, memory)); }
    }
    ASSERT_GE(cost.size(), 3u);
    std::size_t best = 0;
    for (std::size_t i = 1; i < cost.size(); ++i) {
      if (cost[i] < cost[best]) { best = i; }
    }
    for (std::size_t i = 1; i <= best; ++i) { EXPECT_LT(cost[i], cost[i - 1]) << "memory " << memory; }
    for (std::size_t i = best + 1; i < cost.size(); ++i) { EXPECT_GT(cost[i], cost[i - 1]) << "memory " << memory; }
  }
}

TEST(Rmps, FdHalfOverlapGrowsWithSize)
{
  // with 50 % overlap the minimizer is the smallest admissible size
  for (long F = 128; F <= 65536; F *= 2) { EXPECT_GT(rmps_fd(F), rmps_fd(F / 2)); }
}

TEST(Report, EngineNamesAndAssumptions)
{
  for (auto kind : {EngineKind::direct, EngineKind::clustered, EngineKind::fuzzy, EngineKind::freq_domain}) {
    EXPECT_EQ(engine_from_string(to_string(kind)), kind);
  }
  EXPECT_EQ(engine_from_string("td"), EngineKind::direct);
  EXPECT_EQ(engine_from_string("hard"), EngineKind::clustered);
  EXPECT_THROW(engine_from_string("lms"), ParameterError);

  const auto td = complexity_report(EngineKind::direct, 273);
  EXPECT_EQ(td.rmps, 408.0);
  EXPECT_NE(std::find(td.assumptions.begin(), td.assumptions.end(), "Karatsuba"), td.assumptions.end());

  const auto fz = complexity_report(EngineKind::fuzzy, 12);
  EXPECT_EQ(fz.rmps, complexity_report(EngineKind::clustered, 12).rmps);

  const auto fd = complexity_report(EngineKind::freq_domain, 512);
  EXPECT_EQ(fd.rmps, rmps_fd(512, 256));
  EXPECT_NE(std::find(fd.assumptions.begin(), fd.assumptions.end(), "50% overlap"), fd.assumptions.end());
  EXPECT_THROW(complexity_report(EngineKind::freq_domain, 500), ParameterError);
}
