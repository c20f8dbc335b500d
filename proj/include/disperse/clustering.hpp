#ifndef DISPERSE_CLUSTERING_HPP_
#define DISPERSE_CLUSTERING_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "disperse/types.hpp"

namespace disperse {

/// Hard partition of points into centroids.
template <typename Scalar = double>
struct ClusterPlan
{
  CVector<Scalar> centroids;
  /// assignment[i] is the centroid index of point i.
  std::vector<Index> assignment;
  /// Within-cluster sum of squared distances for `assignment`.
  Scalar sse{};
  /// SSE after each Lloyd iteration, the final reassignment last.
  std::vector<Scalar> sse_history;
  int iterations{};

  Index n_clusters() const { return centroids.size(); }
  Index n_points() const { return static_cast<Index>(assignment.size()); }
};

struct KMeansOptions
{
  int max_iter{300};
  /// Absolute centroid displacement below which iteration stops.
  double tol{1e-10};
  /// Rescale centroids onto the mean point modulus after each update.
  bool renormalize{false};
};

/// Two nearest centroids of a point and the normalized inverse-distance
/// memberships v1 = d2 / (d1 + d2), v2 = d1 / (d1 + d2).
template <typename Scalar = double>
struct Membership
{
  Index nearest{};
  Index second{};
  Scalar v1{};
  Scalar v2{};
  Scalar d1{};
  Scalar d2{};
};

enum class EntryKind { hard, soft };

template <typename Scalar = double>
struct FuzzyEntry
{
  EntryKind kind{EntryKind::hard};
  Index nearest{};
  /// Only meaningful for soft entries.
  Index second{};
  Scalar v1{1};
  Scalar v2{0};

  bool is_soft() const { return kind == EntryKind::soft; }
};

/// Centroids plus per-point hard or two-cluster soft assignment.
template <typename Scalar = double>
struct FuzzyPlan
{
  CVector<Scalar> centroids;
  std::vector<FuzzyEntry<Scalar>> entries;
  Scalar eta{};

  Index n_clusters() const { return centroids.size(); }
  Index n_points() const { return static_cast<Index>(entries.size()); }

  Index n_soft() const
  {
    Index n = 0;
    for (const auto & e : entries) { n += e.is_soft() ? 1 : 0; }
    return n;
  }
};

namespace detail {

/// Index of the closest centroid by squared distance, lowest index on ties.
template <typename Scalar>
Index nearest_centroid(const Complex<Scalar> & p, const CVector<Scalar> & centroids, Scalar * dist2 = nullptr)
{
  Index best   = 0;
  Scalar bestd = std::numeric_limits<Scalar>::infinity();
  for (Index j = 0; j < centroids.size(); ++j) {
    const Scalar d = std::norm(p - centroids(j));
    if (d < bestd) {
      bestd = d;
      best  = j;
    }
  }
  if (dist2) { *dist2 = bestd; }
  return best;
}

template <typename Scalar>
CVector<Scalar> kmeanspp_seed(const CVector<Scalar> & points, Index k, std::mt19937_64 & rng)
{
  const Index n = points.size();
  CVector<Scalar> centroids(k);
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);

  std::uniform_int_distribution<Index> pick(0, n - 1);
  Index first          = pick(rng);
  centroids(0)         = points(first);
  chosen[static_cast<std::size_t>(first)] = true;

  std::vector<Scalar> d2(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) { d2[static_cast<std::size_t>(i)] = std::norm(points(i) - centroids(0)); }

  std::uniform_real_distribution<Scalar> unit(Scalar(0), Scalar(1));
  for (Index c = 1; c < k; ++c) {
    Scalar total = 0;
    for (Scalar v : d2) { total += v; }

    Index next = -1;
    if (total > Scalar(0)) {
      const Scalar target = unit(rng) * total;
      Scalar acc          = 0;
      for (Index i = 0; i < n; ++i) {
        acc += d2[static_cast<std::size_t>(i)];
        if (acc > target && d2[static_cast<std::size_t>(i)] > Scalar(0)) {
          next = i;
          break;
        }
      }
      // rounding at the tail: take the last point with positive weight
      if (next < 0) {
        for (Index i = n - 1; i >= 0; --i) {
          if (d2[static_cast<std::size_t>(i)] > Scalar(0)) {
            next = i;
            break;
          }
        }
      }
    } else {
      // all remaining points coincide with a centroid
      for (Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) {
          next = i;
          break;
        }
      }
    }

    chosen[static_cast<std::size_t>(next)] = true;
    centroids(c)                           = points(next);
    for (Index i = 0; i < n; ++i) {
      auto & v = d2[static_cast<std::size_t>(i)];
      v        = std::min(v, std::norm(points(i) - centroids(c)));
    }
  }
  return centroids;
}

template <typename Scalar>
Scalar assignment_sse(const CVector<Scalar> & points, const CVector<Scalar> & centroids, const std::vector<Index> & assignment)
{
  Scalar sse = 0;
  for (Index i = 0; i < points.size(); ++i) {
    sse += std::norm(points(i) - centroids(assignment[static_cast<std::size_t>(i)]));
  }
  return sse;
}

}  // namespace detail

/// Lloyd's k-means on the complex plane with k-means++ seeding.
///
/// Deterministic for a fixed seed. Clusters that empty out are reseeded with
/// the point farthest from its current centroid.
template <typename Scalar>
ClusterPlan<Scalar> kmeans(
  const CVector<Scalar> & points, Index k, std::uint64_t seed, const KMeansOptions & options = {})
{
  const Index n = points.size();
  detail::require(n > 0, "kmeans needs at least one point");
  detail::require(k >= 1, "kmeans needs k >= 1");
  if (k > n) {
    std::ostringstream os;
    os << "kmeans k = " << k << " exceeds number of points " << n;
    throw ParameterError(os.str());
  }
  detail::require(options.max_iter >= 1, "max_iter must be positive");

  std::mt19937_64 rng(seed);
  ClusterPlan<Scalar> plan;
  plan.centroids = detail::kmeanspp_seed(points, k, rng);
  plan.assignment.assign(static_cast<std::size_t>(n), 0);

  Scalar mean_modulus = 0;
  if (options.renormalize) {
    for (Index i = 0; i < n; ++i) { mean_modulus += std::abs(points(i)); }
    mean_modulus /= static_cast<Scalar>(n);
  }

  std::vector<Scalar> dist2(static_cast<std::size_t>(n));
  std::vector<Index> counts(static_cast<std::size_t>(k));
  CVector<Scalar> sums(k);

  for (int iter = 0; iter < options.max_iter; ++iter) {
    for (Index i = 0; i < n; ++i) {
      plan.assignment[static_cast<std::size_t>(i)] =
        detail::nearest_centroid(points(i), plan.centroids, &dist2[static_cast<std::size_t>(i)]);
    }

    // empty-cluster repair
    std::fill(counts.begin(), counts.end(), 0);
    for (Index a : plan.assignment) { ++counts[static_cast<std::size_t>(a)]; }
    for (Index j = 0; j < k; ++j) {
      if (counts[static_cast<std::size_t>(j)] > 0) { continue; }
      Index far      = -1;
      Scalar fard    = Scalar(0);
      for (Index i = 0; i < n; ++i) {
        const auto owner = plan.assignment[static_cast<std::size_t>(i)];
        if (dist2[static_cast<std::size_t>(i)] > fard && counts[static_cast<std::size_t>(owner)] > 1) {
          fard = dist2[static_cast<std::size_t>(i)];
          far  = i;
        }
      }
      if (far < 0) { continue; }  // fewer distinct points than clusters
      --counts[static_cast<std::size_t>(plan.assignment[static_cast<std::size_t>(far)])];
      plan.assignment[static_cast<std::size_t>(far)] = j;
      counts[static_cast<std::size_t>(j)]            = 1;
      plan.centroids(j)                              = points(far);
      dist2[static_cast<std::size_t>(far)]           = Scalar(0);
    }

    sums.setZero();
    for (Index i = 0; i < n; ++i) { sums(plan.assignment[static_cast<std::size_t>(i)]) += points(i); }

    Scalar shift = 0;
    for (Index j = 0; j < k; ++j) {
      const auto c = counts[static_cast<std::size_t>(j)];
      if (c == 0) { continue; }
      Complex<Scalar> updated = sums(j) / static_cast<Scalar>(c);
      if (options.renormalize && std::abs(updated) > Scalar(0)) {
        updated *= mean_modulus / std::abs(updated);
      }
      shift             = std::max(shift, std::abs(updated - plan.centroids(j)));
      plan.centroids(j) = updated;
    }

    plan.iterations = iter + 1;
    plan.sse_history.push_back(detail::assignment_sse(points, plan.centroids, plan.assignment));
    if (shift < static_cast<Scalar>(options.tol)) { break; }
  }

  for (Index i = 0; i < n; ++i) {
    plan.assignment[static_cast<std::size_t>(i)] = detail::nearest_centroid(points(i), plan.centroids);
  }
  plan.sse = detail::assignment_sse(points, plan.centroids, plan.assignment);
  plan.sse_history.push_back(plan.sse);
  return plan;
}

/// Distances to, and memberships in, the two closest centroids.
template <typename Scalar>
Membership<Scalar> memberships(const Complex<Scalar> & point, const CVector<Scalar> & centroids)
{
  detail::require(centroids.size() >= 2, "memberships needs at least two centroids");

  Index first = -1, second = -1;
  Scalar best1 = std::numeric_limits<Scalar>::infinity();
  Scalar best2 = std::numeric_limits<Scalar>::infinity();
  for (Index j = 0; j < centroids.size(); ++j) {
    const Scalar d = std::norm(point - centroids(j));
    if (d < best1) {
      best2  = best1;
      second = first;
      best1  = d;
      first  = j;
    } else if (d < best2) {
      best2  = d;
      second = j;
    }
  }

  Membership<Scalar> m;
  m.nearest = first;
  m.second  = second;
  m.d1      = std::sqrt(best1);
  m.d2      = std::sqrt(best2);
  const Scalar total = m.d1 + m.d2;
  if (total > Scalar(0)) {
    m.v1 = m.d2 / total;
    m.v2 = m.d1 / total;
  } else {
    m.v1 = Scalar(0.5);
    m.v2 = Scalar(0.5);
  }
  return m;
}

/// Soft decision on top of a hard plan: points whose dominant membership v1
/// exceeds `eta` (or that sit exactly on a centroid) stay hard; the rest are
/// shared between their two nearest centroids.
template <typename Scalar>
FuzzyPlan<Scalar> fuzzify(const ClusterPlan<Scalar> & plan, const CVector<Scalar> & taps, Scalar eta)
{
  detail::require(eta >= Scalar(0) && eta <= Scalar(1), "eta must lie in [0, 1]");
  detail::require(plan.n_points() == taps.size(), "cluster plan was fitted on a different tap count");
  detail::require(plan.n_clusters() >= 1, "cluster plan has no centroids");
  if (plan.n_clusters() < 2 && eta >= Scalar(0.5)) {
    throw ParameterError("soft assignment needs at least two centroids");
  }

  FuzzyPlan<Scalar> fuzzy;
  fuzzy.centroids = plan.centroids;
  fuzzy.eta       = eta;
  fuzzy.entries.resize(static_cast<std::size_t>(taps.size()));

  for (Index i = 0; i < taps.size(); ++i) {
    auto & entry = fuzzy.entries[static_cast<std::size_t>(i)];
    if (plan.n_clusters() < 2) {
      entry.nearest = 0;
      continue;
    }
    const auto m = memberships(taps(i), plan.centroids);
    entry.nearest = m.nearest;
    entry.second  = m.second;
    entry.v1      = m.v1;
    entry.v2      = m.v2;
    entry.kind    = (m.v1 > eta || m.d1 == Scalar(0)) ? EntryKind::hard : EntryKind::soft;
  }
  return fuzzy;
}

/// Hard plan obtained by sending every soft entry to its nearest centroid.
template <typename Scalar>
ClusterPlan<Scalar> harden(const FuzzyPlan<Scalar> & plan)
{
  ClusterPlan<Scalar> hard;
  hard.centroids = plan.centroids;
  hard.assignment.reserve(plan.entries.size());
  for (const auto & e : plan.entries) { hard.assignment.push_back(e.nearest); }
  return hard;
}

}  // namespace disperse

#endif  // DISPERSE_CLUSTERING_HPP_
