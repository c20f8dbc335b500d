#include <gtest/gtest.h>

#include <random>

#include "disperse/equalizers.hpp"

using namespace disperse;

namespace {

SystemParams<double> link_params(double km)
{
  return SystemParams<double>::from_engineering(17.0, 1550.0, km, 25e-12, 3e8);
}

CVector<double> noise(std::mt19937_64 & rng, Index n)
{
  std::normal_distribution<double> g;
  CVector<double> v(n);
  for (auto & x : v) { x = {g(rng), g(rng)}; }
  return v;
}

/// Textbook "same" convolution with explicit bounds checks.
CVector<double> reference_conv(const CVector<double> & x, const CVector<double> & h)
{
  const Index half = (h.size() - 1) / 2;
  CVector<double> y = CVector<double>::Zero(x.size());
  for (Index n = 0; n < x.size(); ++n) {
    for (Index k = -half; k <= half; ++k) {
      const Index src = n - k;
      if (src >= 0 && src < x.size()) { y(n) += h(k + half) * x(src); }
    }
  }
  return y;
}

CVector<double> substituted(const ClusterPlan<double> & plan)
{
  CVector<double> h(plan.n_points());
  for (Index i = 0; i < h.size(); ++i) { h(i) = plan.centroids(plan.assignment[static_cast<std::size_t>(i)]); }
  return h;
}

CVector<double> blended(const FuzzyPlan<double> & plan, double alpha)
{
  CVector<double> h(plan.n_points());
  for (Index i = 0; i < h.size(); ++i) {
    const auto & e = plan.entries[static_cast<std::size_t>(i)];
    h(i) = e.is_soft() ? alpha * plan.centroids(e.nearest) + (1 - alpha) * plan.centroids(e.second)
                       : plan.centroids(e.nearest);
  }
  return h;
}

double max_abs(const CVector<double> & v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Direct, IdentityKernel)
{
  std::mt19937_64 rng(1);
  const auto x = noise(rng, 64);
  TapProfile<double> one;
  one.taps = CVector<double>::Ones(1);
  EXPECT_EQ(equalize_direct(x, one), x);
}

TEST(Direct, ImpulseGivesTaps)
{
  const auto taps = generate_taps(link_params(100.0), 21);
  CVector<double> x = CVector<double>::Zero(101);
  x(50)             = 1.0;
  const auto y      = equalize_direct(x, taps);
  EXPECT_LT(max_abs(y.segment(40, 21) - taps.taps), 1e-15);
  EXPECT_LT(max_abs(y.head(40)), 1e-300);
}

TEST(Direct, MatchesReference)
{
  std::mt19937_64 rng(2);
  const auto taps = generate_taps(link_params(1800.0), 273);
  const auto x    = noise(rng, 700);
  EXPECT_LT(max_abs(equalize_direct(x, taps) - reference_conv(x, taps.taps)), 1e-12);
}

TEST(Direct, RejectsShortSignal)
{
  const auto taps = generate_taps(link_params(1800.0), 273);
  EXPECT_THROW(equalize_direct(CVector<double>::Zero(100), taps), ParameterError);
}

TEST(Clustered, MatchesSubstitutionOracle)
{
  std::mt19937_64 rng(3);
  const auto taps = generate_taps(link_params(1800.0), 273);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto plan = kmeans(taps.taps, 26, seed);
    const auto x    = noise(rng, 1000);
    EXPECT_LT(max_abs(equalize_clustered(x, plan, taps) - reference_conv(x, substituted(plan))), 1e-10);
  }
}

TEST(Clustered, OneClusterPerTapIsDirect)
{
  std::mt19937_64 rng(4);
  const auto taps = generate_taps(link_params(300.0), max_taps(link_params(300.0)));
  ClusterPlan<double> plan;
  plan.centroids = taps.taps;
  for (Index i = 0; i < taps.n_taps(); ++i) { plan.assignment.push_back(i); }
  const auto x      = noise(rng, 500);
  const auto direct = equalize_direct(x, taps);
  EXPECT_LT(max_abs(equalize_clustered(x, plan, taps) - direct), 1e-12 * max_abs(direct));
}

TEST(Clustered, SingleClusterIsRunningSum)
{
  std::mt19937_64 rng(5);
  const auto taps = generate_taps(link_params(300.0), 31);
  const auto plan = kmeans(taps.taps, 1, 0);
  const auto x    = noise(rng, 200);
  const auto y    = equalize_clustered(x, plan, taps);
  for (Index n = 0; n < x.size(); ++n) {
    Complex<double> window{};
    for (Index m = std::max<Index>(0, n - 15); m <= std::min<Index>(x.size() - 1, n + 15); ++m) { window += x(m); }
    EXPECT_LT(std::abs(y(n) - plan.centroids(0) * window), 1e-12);
  }
}

TEST(Clustered, RejectsMismatchedPlan)
{
  const auto taps  = generate_taps(link_params(1800.0), 273);
  const auto other = generate_taps(link_params(1800.0), 271);
  const auto plan  = kmeans(other.taps, 10, 0);
  EXPECT_THROW(equalize_clustered(CVector<double>::Zero(400), plan, taps), ParameterError);
}

TEST(Fuzzy, MatchesEffectiveTapOracle)
{
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.5, 1.0);
  const auto taps = generate_taps(link_params(1800.0), 273);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto plan  = fuzzify(kmeans(taps.taps, 12, seed), taps.taps, u(rng));
    const double a   = u(rng);
    const auto x     = noise(rng, 1000);
    EXPECT_LT(max_abs(equalize_fuzzy(x, plan, taps, a) - reference_conv(x, blended(plan, a))), 1e-10);
  }
}

TEST(Fuzzy, AlphaOneIsNearestHardening)
{
  std::mt19937_64 rng(7);
  const auto taps = generate_taps(link_params(1800.0), 273);
  const auto plan = fuzzify(kmeans(taps.taps, 12, 1), taps.taps, 0.9);
  ASSERT_GT(plan.n_soft(), 0);
  const auto x = noise(rng, 800);
  EXPECT_LT(max_abs(equalize_fuzzy(x, plan, taps, 1.0) - equalize_clustered(x, harden(plan), taps)), 1e-12);
}

TEST(Fuzzy, NoSoftEntriesIsBitExactHard)
{
  std::mt19937_64 rng(8);
  const auto taps = generate_taps(link_params(1800.0), 273);
  const auto hard = kmeans(taps.taps, 12, 1);
  const auto plan = fuzzify(hard, taps.taps, 0.3);
  const auto x    = noise(rng, 800);
  EXPECT_EQ(equalize_fuzzy(x, plan, taps, 0.7), equalize_clustered(x, hard, taps));
}

TEST(Fuzzy, RejectsAlpha)
{
  const auto taps = generate_taps(link_params(1800.0), 273);
  const auto plan = fuzzify(kmeans(taps.taps, 12, 1), taps.taps, 0.8);
  const CVector<double> x = CVector<double>::Zero(400);
  EXPECT_THROW(equalize_fuzzy(x, plan, taps, 0.49), ParameterError);
  EXPECT_THROW(equalize_fuzzy(x, plan, taps, 1.01), ParameterError);
}

TEST(Accumulators, HardPathIsPartition)
{
  std::mt19937_64 rng(9);
  const auto taps = generate_taps(link_params(1800.0), 273);
  const auto hard = kmeans(taps.taps, 20, 3);
  const auto x    = noise(rng, 600);
  const auto padded = detail::pad_for_taps<double>(x, 273);
  const ClusterAccumulators<double> acc(hard);
  for (Index n : {0, 100, 300, 599}) {
    const auto sums = acc.at(padded, n, 1.0);
    EXPECT_LT(std::abs(sums.sum() - padded.segment(n, 273).sum()), 1e-11);
  }

  const auto fz = fuzzify(hard, taps.taps, 0.85);
  const ClusterAccumulators<double> facc(fz);
  const ClusterAccumulators<double> hacc(harden(fz));
  for (Index n : {5, 250}) { EXPECT_LT(max_abs(facc.at(padded, n, 1.0) - hacc.at(padded, n, 1.0)), 1e-12); }
}

TEST(FreqDomain, TapsModeMatchesDirect)
{
  std::mt19937_64 rng(10);
  const auto taps = generate_taps(link_params(1800.0), 273);
  const auto x    = noise(rng, 3000);
  const auto ref  = equalize_direct(x, taps);
  for (Index F : {1024, 2048, 4096}) {
    FreqDomain<double> fd{F, FdMode::taps, taps, taps.params};
    const auto y = equalize_fd(x, fd);
    ASSERT_EQ(y.size(), x.size());
    const double rms = std::sqrt((y - ref).squaredNorm() / static_cast<double>(x.size()));
    EXPECT_LT(rms, 1e-9) << "fft_size " << F;
  }
}

TEST(FreqDomain, FlatResponseIsIdentity)
{
  std::mt19937_64 rng(11);
  auto p = link_params(1800.0);
  p.fiber_length *= 1e-12;
  const auto x = noise(rng, 1000);
  FreqDomain<double> fd{256, FdMode::analytic, {}, p};
  const auto y = equalize_fd(x, fd);
  EXPECT_LT(std::sqrt((y - x).squaredNorm() / 1000.0), 1e-9);
}

TEST(FreqDomain, InvertsChannel)
{
  const auto p = link_params(1800.0);
  CVector<double> s = CVector<double>::Zero(8192);
  for (Index i = 0; i < s.size(); ++i) {
    const double t = (static_cast<double>(i) - 4096.0) / 10.0;
    s(i)           = std::exp(-0.5 * t * t);
  }
  FreqDomain<double> fd{4096, FdMode::analytic, {}, p};
  const auto y = equalize_fd(apply_channel(s, p), fd);
  EXPECT_LT(std::sqrt((y - s).squaredNorm() / s.squaredNorm()), 1e-9);
}

TEST(FreqDomain, Errors)
{
  const auto taps = generate_taps(link_params(1800.0), 273);
  const CVector<double> x = CVector<double>::Zero(1000);
  EXPECT_THROW(equalize_fd(x, FreqDomain<double>{512, FdMode::taps, taps, taps.params}), ParameterError);
  EXPECT_THROW(equalize_fd(x, FreqDomain<double>{1000, FdMode::analytic, {}, taps.params}), ParameterError);
  EXPECT_THROW(equalize_fd(CVector<double>(0), FreqDomain<double>{512, FdMode::analytic, {}, taps.params}), ParameterError);
}

TEST(Engines, LinearAndTimeInvariant)
{
  std::mt19937_64 rng(12);
  const auto taps  = generate_taps(link_params(1800.0), 273);
  const auto plan  = kmeans(taps.taps, 16, 4);
  const auto fplan = fuzzify(plan, taps.taps, 0.8);
  const std::vector<EqualizerSpec<double>> engines{
    DirectFir<double>{taps}, Clustered<double>{plan, taps}, FuzzyClustered<double>{fplan, taps, 0.7},
    FreqDomain<double>{1024, FdMode::taps, taps, taps.params}, FreqDomain<double>{1024, FdMode::analytic, {}, taps.params}};

  const auto x = noise(rng, 1500);
  const auto z = noise(rng, 1500);
  const Complex<double> a(0.3, -1.2), b(-0.7, 0.4);

  for (std::size_t i = 0; i < engines.size(); ++i) {
    const auto & e = engines[i];
    const auto lhs = equalize<double>(CVector<double>(a * x + b * z), e);
    const auto rhs = CVector<double>(a * equalize<double>(x, e) + b * equalize<double>(z, e));
    EXPECT_LT(max_abs(lhs - rhs), 1e-10);

    // the analytic response outlives the discard region, so overlap-save is
    // only invariant to shifts by whole blocks
    const Index shift = i == 4 ? 512 : 37;
    CVector<double> xs = CVector<double>::Zero(1500 + shift);
    xs.tail(1500) = x;
    const auto y  = equalize<double>(x, e);
    const auto ys = equalize<double>(xs, e);
    const Index t = transient_length(e);
    EXPECT_LT(max_abs(ys.segment(shift + t, 1500 - 2 * t) - y.segment(t, 1500 - 2 * t)), 1e-10) << "engine " << i;
  }
}

TEST(Counter, ClusteredCostsThreePerCluster)
{
  const auto taps = generate_taps(link_params(1800.0), 273);
  const auto plan = kmeans(taps.taps, 26, 0);
  const CVector<double> x = CVector<double>::Ones(500);

  MultiplyCounter hard;
  equalize_clustered(x, plan, taps, &hard);
  EXPECT_EQ(hard.per_output(), 3.0 * 26);

  MultiplyCounter fuzzy;
  const auto fplan = fuzzify(plan, taps.taps, 0.85);
  equalize_fuzzy(x, fplan, taps, 0.7, &fuzzy);
  EXPECT_EQ(fuzzy.complex_products, 26u * 500u);
  // alpha scalings are tallied separately rather than folded into the 3 N_c figure
  EXPECT_GT(fuzzy.real_scalings, 0u);

  MultiplyCounter direct;
  equalize_direct(x, taps, &direct);
  EXPECT_EQ(direct.per_output(), 3.0 * 273);
}
