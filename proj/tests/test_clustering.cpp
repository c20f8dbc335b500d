#include <gtest/gtest.h>

#include <random>

#include "disperse/cd_model.hpp"
#include "disperse/clustering.hpp"

using namespace disperse;

namespace {

CVector<double> paper_taps(Index n)
{
  const auto p = SystemParams<double>::from_engineering(17.0, 1550.0, 1800.0, 25e-12, 3e8);
  return generate_taps(p, n).taps;
}

CVector<double> random_points(std::mt19937_64 & rng, Index n)
{
  std::normal_distribution<double> g;
  CVector<double> pts(n);
  for (auto & v : pts) { v = {g(rng), g(rng)}; }
  return pts;
}

}  // namespace

TEST(KMeans, SeparableRepeatedValues)
{
  const CVector<double> distinct = (CVector<double>(4) << Complex<double>(1, 1), Complex<double>(-2, 0.5),
                                    Complex<double>(0, -3), Complex<double>(4, 4))
                                     .finished();
  CVector<double> pts(4 * 5);
  for (Index r = 0; r < 5; ++r) {
    for (Index k = 0; k < 4; ++k) { pts(r * 4 + k) = distinct(k); }
  }
  const auto plan = kmeans(pts, 4, 3);
  EXPECT_EQ(plan.sse, 0.0);
  for (Index k = 0; k < 4; ++k) {
    bool found = false;
    for (Index j = 0; j < 4; ++j) { found = found || plan.centroids(j) == distinct(k); }
    EXPECT_TRUE(found) << "missing centroid " << distinct(k);
  }
}

TEST(KMeans, SingleClusterIsMean)
{
  std::mt19937_64 rng(2);
  const auto pts  = random_points(rng, 57);
  const auto plan = kmeans(pts, 1, 9);
  EXPECT_NEAR(std::abs(plan.centroids(0) - pts.mean()), 0.0, 1e-12);
  for (Index a : plan.assignment) { EXPECT_EQ(a, 0); }
}

TEST(KMeans, OneClusterPerPoint)
{
  std::mt19937_64 rng(3);
  const auto pts  = random_points(rng, 23);
  const auto plan = kmeans(pts, 23, 4);
  EXPECT_EQ(plan.sse, 0.0);
  std::vector<int> used(23, 0);
  for (Index a : plan.assignment) { ++used[static_cast<std::size_t>(a)]; }
  for (int u : used) { EXPECT_EQ(u, 1); }
}

TEST(KMeans, RejectsBadK)
{
  const auto pts = paper_taps(21);
  EXPECT_THROW(kmeans(pts, 0, 1), ParameterError);
  EXPECT_THROW(kmeans(pts, 22, 1), ParameterError);
  EXPECT_THROW(kmeans(CVector<double>(0), 1, 1), ParameterError);
}

TEST(KMeans, DeterministicMonotoneAndArgmin)
{
  const auto taps = paper_taps(273);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = kmeans(taps, 12, seed);
    const auto b = kmeans(taps, 12, seed);
    EXPECT_EQ(a.centroids, b.centroids);
    EXPECT_EQ(a.assignment, b.assignment);
    for (std::size_t i = 1; i < a.sse_history.size(); ++i) { EXPECT_LE(a.sse_history[i], a.sse_history[i - 1]); }

    std::vector<int> used(12, 0);
    for (Index i = 0; i < taps.size(); ++i) {
      const Index assigned = a.assignment[static_cast<std::size_t>(i)];
      ++used[static_cast<std::size_t>(assigned)];
      const double d = std::norm(taps(i) - a.centroids(assigned));
      for (Index j = 0; j < 12; ++j) {
        const double dj = std::norm(taps(i) - a.centroids(j));
        EXPECT_TRUE(d < dj || (d == dj && assigned <= j));
      }
    }
    for (int u : used) { EXPECT_GT(u, 0); }
  }
}

TEST(KMeans, SymmetricTapsShareCluster)
{
  const auto taps = paper_taps(273);
  const auto plan = kmeans(taps, 26, 1);
  const Index c   = 136;
  for (Index k = 1; k <= c; ++k) {
    EXPECT_EQ(plan.assignment[static_cast<std::size_t>(c + k)], plan.assignment[static_cast<std::size_t>(c - k)]);
  }
}

TEST(KMeans, RenormalizeKeepsModulus)
{
  const auto taps = paper_taps(273);
  KMeansOptions opt;
  opt.renormalize = true;
  const auto plan = kmeans(taps, 12, 1, opt);
  const double r  = std::abs(taps(0));
  for (Index k = 0; k < plan.n_clusters(); ++k) { EXPECT_NEAR(std::abs(plan.centroids(k)), r, 1e-12); }
}

TEST(Memberships, HandWorked)
{
  const CVector<double> c = (CVector<double>(2) << Complex<double>(0, 0), Complex<double>(3, 0)).finished();
  const auto m            = memberships(Complex<double>(1, 0), c);
  EXPECT_EQ(m.nearest, 0);
  EXPECT_EQ(m.second, 1);
  EXPECT_DOUBLE_EQ(m.d1, 1.0);
  EXPECT_DOUBLE_EQ(m.d2, 2.0);
  EXPECT_DOUBLE_EQ(m.v1, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.v2, 1.0 / 3.0);
}

TEST(Memberships, EquidistantAndCoincident)
{
  const CVector<double> c =
    (CVector<double>(3) << Complex<double>(-1, 0), Complex<double>(1, 0), Complex<double>(0, 5)).finished();
  const auto mid = memberships(Complex<double>(0, 0), c);
  EXPECT_EQ(mid.nearest, 0);  // lower index wins the tie
  EXPECT_EQ(mid.second, 1);
  EXPECT_DOUBLE_EQ(mid.v1, 0.5);
  EXPECT_DOUBLE_EQ(mid.v2, 0.5);

  const auto on = memberships(Complex<double>(1, 0), c);
  EXPECT_EQ(on.nearest, 1);
  EXPECT_EQ(on.v1, 1.0);
  EXPECT_EQ(on.v2, 0.0);

  const CVector<double> dup = (CVector<double>(2) << Complex<double>(2, 2), Complex<double>(2, 2)).finished();
  const auto both           = memberships(Complex<double>(2, 2), dup);
  EXPECT_EQ(both.v1, 0.5);
  EXPECT_EQ(both.nearest, 0);
  EXPECT_EQ(both.second, 1);

  EXPECT_THROW(memberships(Complex<double>(0, 0), CVector<double>(1)), ParameterError);
}

TEST(Fuzzify, ThresholdConsistency)
{
  const auto taps = paper_taps(273);
  const auto plan = kmeans(taps, 12, 7);
  for (double eta : {0.5, 0.6, 0.75, 0.8, 0.9, 1.0}) {
    const auto fz = fuzzify(plan, taps, eta);
    ASSERT_EQ(fz.n_points(), taps.size());
    for (Index i = 0; i < taps.size(); ++i) {
      const auto & e = fz.entries[static_cast<std::size_t>(i)];
      const auto m   = memberships(taps(i), plan.centroids);
      if (e.is_soft()) {
        EXPECT_NEAR(e.v1 + e.v2, 1.0, 1e-12);
        EXPECT_GE(e.v1, 0.5);
        EXPECT_LE(e.v1, eta);
        EXPECT_NE(e.nearest, e.second);
      } else {
        EXPECT_TRUE(m.v1 > eta || m.d1 == 0.0);
      }
    }
  }
}

TEST(Fuzzify, BelowHalfIsHardPlan)
{
  const auto taps = paper_taps(273);
  const auto plan = kmeans(taps, 12, 7);
  for (double eta : {0.0, 0.3, 0.49}) {
    const auto fz = fuzzify(plan, taps, eta);
    EXPECT_EQ(fz.n_soft(), 0);
    for (Index i = 0; i < taps.size(); ++i) {
      EXPECT_EQ(fz.entries[static_cast<std::size_t>(i)].nearest, plan.assignment[static_cast<std::size_t>(i)]);
    }
  }
}

TEST(Fuzzify, EtaOneSoftensAllButCentroids)
{
  const auto taps = paper_taps(21);
  auto plan       = kmeans(taps, 5, 2);
  plan.centroids(0) = taps(3);  // force one exact coincidence
  const auto fz     = fuzzify(plan, taps, 1.0);
  for (Index i = 0; i < taps.size(); ++i) {
    const auto m = memberships(taps(i), plan.centroids);
    EXPECT_EQ(fz.entries[static_cast<std::size_t>(i)].is_soft(), m.d1 > 0.0) << "tap " << i;
  }
}

TEST(Fuzzify, Errors)
{
  const auto taps = paper_taps(21);
  const auto one  = kmeans(taps, 1, 2);
  EXPECT_THROW(fuzzify(one, taps, 0.8), ParameterError);
  EXPECT_EQ(fuzzify(one, taps, 0.4).n_soft(), 0);
  const auto plan = kmeans(taps, 4, 2);
  EXPECT_THROW(fuzzify(plan, taps, 1.2), ParameterError);
  EXPECT_THROW(fuzzify(plan, paper_taps(19), 0.8), ParameterError);
}

TEST(Fuzzify, PaperOperatingPointIsPinned)
{
  const auto taps = paper_taps(273);
  const auto plan = kmeans(taps, 12, 7);
  const auto a    = fuzzify(plan, taps, 0.8);
  const auto b    = fuzzify(kmeans(taps, 12, 7), taps, 0.8);
  EXPECT_EQ(a.n_soft(), b.n_soft());
  EXPECT_EQ(a.n_soft(), 166);
}
