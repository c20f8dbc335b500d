#ifndef DISPERSE_EQUALIZERS_HPP_
#define DISPERSE_EQUALIZERS_HPP_

#include <cstdint>
#include <sstream>
#include <variant>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "disperse/cd_model.hpp"
#include "disperse/clustering.hpp"
#include "disperse/types.hpp"

namespace disperse {

/// Multiplication tally filled in by the engines when a counter is passed.
///
/// Complex-by-complex products are costed at 3 real multiplications
/// (Karatsuba); real-by-complex scalings at 2.
struct MultiplyCounter
{
  std::uint64_t complex_products{};
  std::uint64_t real_scalings{};
  std::uint64_t output_samples{};

  std::uint64_t real_multiplications() const { return 3 * complex_products + 2 * real_scalings; }

  double per_output() const
  {
    return output_samples ? static_cast<double>(real_multiplications()) / static_cast<double>(output_samples) : 0.0;
  }
};

enum class FdMode { analytic, taps };

template <typename Scalar = double>
struct DirectFir
{
  TapProfile<Scalar> taps;
};

template <typename Scalar = double>
struct Clustered
{
  ClusterPlan<Scalar> plan;
  TapProfile<Scalar> taps;
};

template <typename Scalar = double>
struct FuzzyClustered
{
  FuzzyPlan<Scalar> plan;
  TapProfile<Scalar> taps;
  Scalar alpha{1};
};

template <typename Scalar = double>
struct FreqDomain
{
  Index fft_size{};
  FdMode mode{FdMode::analytic};
  /// Used when mode == FdMode::taps.
  TapProfile<Scalar> taps;
  SystemParams<Scalar> params;
};

template <typename Scalar = double>
using EqualizerSpec = std::variant<DirectFir<Scalar>, Clustered<Scalar>, FuzzyClustered<Scalar>, FreqDomain<Scalar>>;

namespace detail {

/// Signal with (n_taps - 1) / 2 zeros on each side, so that the "same"
/// output y(n) = sum_i taps(i) * padded(n + n_taps - 1 - i).
template <typename Scalar, typename Derived>
CVector<Scalar> pad_for_taps(const Eigen::MatrixBase<Derived> & signal, Index n_taps)
{
  const Index half = (n_taps - 1) / 2;
  CVector<Scalar> padded = CVector<Scalar>::Zero(signal.size() + 2 * half);
  padded.segment(half, signal.size()) = signal;
  return padded;
}

template <typename Scalar>
void check_signal(Index signal_size, Index n_taps)
{
  if (signal_size < n_taps) {
    std::ostringstream os;
    os << "signal length " << signal_size << " is shorter than the filter (" << n_taps << " taps)";
    throw ParameterError(os.str());
  }
}

/// Tap indices grouped by cluster, each list ascending.
using MemberLists = std::vector<std::vector<Index>>;

template <typename Scalar>
Complex<Scalar> sum_members(const CVector<Scalar> & padded, Index base, const std::vector<Index> & members)
{
  Complex<Scalar> acc{};
  for (Index i : members) { acc += padded(base - i); }
  return acc;
}

}  // namespace detail

/// Per-cluster sample sums for the hard and fuzzy clustered engines.
///
/// For output n, entry k is x_s^NF(k) + alpha x_s1^F(k) + (1 - alpha) x_s2^F(k),
/// where the three sums run over hard members, soft taps whose nearest
/// centroid is k, and soft taps whose second centroid is k.
template <typename Scalar = double>
class ClusterAccumulators
{
public:
  explicit ClusterAccumulators(const ClusterPlan<Scalar> & plan)
  : hard_(static_cast<std::size_t>(plan.n_clusters())),
    first_(static_cast<std::size_t>(plan.n_clusters())),
    second_(static_cast<std::size_t>(plan.n_clusters())),
    n_taps_(plan.n_points())
  {
    for (Index i = 0; i < plan.n_points(); ++i) {
      hard_[static_cast<std::size_t>(plan.assignment[static_cast<std::size_t>(i)])].push_back(i);
    }
  }

  explicit ClusterAccumulators(const FuzzyPlan<Scalar> & plan)
  : hard_(static_cast<std::size_t>(plan.n_clusters())),
    first_(static_cast<std::size_t>(plan.n_clusters())),
    second_(static_cast<std::size_t>(plan.n_clusters())),
    n_taps_(plan.n_points())
  {
    for (Index i = 0; i < plan.n_points(); ++i) {
      const auto & e = plan.entries[static_cast<std::size_t>(i)];
      if (e.is_soft()) {
        first_[static_cast<std::size_t>(e.nearest)].push_back(i);
        second_[static_cast<std::size_t>(e.second)].push_back(i);
      } else {
        hard_[static_cast<std::size_t>(e.nearest)].push_back(i);
      }
    }
  }

  Index n_clusters() const { return static_cast<Index>(hard_.size()); }
  Index n_taps() const { return n_taps_; }

  bool has_soft() const
  {
    for (const auto & m : first_) {
      if (!m.empty()) { return true; }
    }
    return false;
  }

  /// Accumulators for output n, given the padded input of `detail::pad_for_taps`.
  CVector<Scalar> at(const CVector<Scalar> & padded, Index n, Scalar alpha) const
  {
    CVector<Scalar> acc(n_clusters());
    for (Index k = 0; k < n_clusters(); ++k) { acc(k) = cluster(padded, n + n_taps_ - 1, k, alpha); }
    return acc;
  }

  Complex<Scalar> cluster(const CVector<Scalar> & padded, Index base, Index k, Scalar alpha) const
  {
    const auto ks      = static_cast<std::size_t>(k);
    Complex<Scalar> nf = detail::sum_members(padded, base, hard_[ks]);
    if (first_[ks].empty() && second_[ks].empty()) { return nf; }
    const Complex<Scalar> f1 = detail::sum_members(padded, base, first_[ks]);
    const Complex<Scalar> f2 = detail::sum_members(padded, base, second_[ks]);
    return nf + alpha * f1 + (Scalar(1) - alpha) * f2;
  }

  /// Number of clusters with soft members, i.e. that pay for the alpha scalings.
  Index n_weighted_clusters() const
  {
    Index n = 0;
    for (std::size_t k = 0; k < first_.size(); ++k) { n += (first_[k].empty() && second_[k].empty()) ? 0 : 1; }
    return n;
  }

private:
  detail::MemberLists hard_;
  detail::MemberLists first_;
  detail::MemberLists second_;
  Index n_taps_;
};

/// Plain FIR convolution, "same" output aligned to the center tap. The first
/// and last (n_taps - 1) / 2 outputs see zero-padded input.
template <typename Scalar, typename Derived>
CVector<Scalar> equalize_direct(
  const Eigen::MatrixBase<Derived> & signal, const TapProfile<Scalar> & taps, MultiplyCounter * counter = nullptr)
{
  const Index N = taps.n_taps();
  detail::require(N >= 1, "tap profile is empty");
  detail::check_signal<Scalar>(signal.size(), N);

  const CVector<Scalar> padded   = detail::pad_for_taps<Scalar>(signal, N);
  const CVector<Scalar> reversed = taps.taps.reverse();
  CVector<Scalar> out(signal.size());
  for (Index n = 0; n < signal.size(); ++n) {
    out(n) = (reversed.array() * padded.segment(n, N).array()).sum();
  }
  if (counter) {
    counter->complex_products += static_cast<std::uint64_t>(N * signal.size());
    counter->output_samples += static_cast<std::uint64_t>(signal.size());
  }
  return out;
}

namespace detail {

template <typename Scalar>
CVector<Scalar> run_accumulators(
  const CVector<Scalar> & padded, Index n_out, const ClusterAccumulators<Scalar> & acc,
  const CVector<Scalar> & centroids, Scalar alpha, MultiplyCounter * counter)
{
  const Index N = acc.n_taps();
  CVector<Scalar> out(n_out);
  for (Index n = 0; n < n_out; ++n) {
    Complex<Scalar> y{};
    for (Index k = 0; k < centroids.size(); ++k) { y += acc.cluster(padded, n + N - 1, k, alpha) * centroids(k); }
    out(n) = y;
  }
  if (counter) {
    counter->complex_products += static_cast<std::uint64_t>(centroids.size() * n_out);
    counter->real_scalings += static_cast<std::uint64_t>(2 * acc.n_weighted_clusters() * n_out);
    counter->output_samples += static_cast<std::uint64_t>(n_out);
  }
  return out;
}

}  // namespace detail

/// Hard-clustered engine: y(n) = sum_k x_s(k) g_c(k).
template <typename Scalar, typename Derived>
CVector<Scalar> equalize_clustered(
  const Eigen::MatrixBase<Derived> & signal, const ClusterPlan<Scalar> & plan, const TapProfile<Scalar> & taps,
  MultiplyCounter * counter = nullptr)
{
  if (plan.n_points() != taps.n_taps()) {
    std::ostringstream os;
    os << "cluster plan covers " << plan.n_points() << " taps but the profile has " << taps.n_taps();
    throw ParameterError(os.str());
  }
  detail::check_signal<Scalar>(signal.size(), taps.n_taps());
  const ClusterAccumulators<Scalar> acc(plan);
  return detail::run_accumulators<Scalar>(
    detail::pad_for_taps<Scalar>(signal, taps.n_taps()), signal.size(), acc, plan.centroids, Scalar(1), counter);
}

/// Fuzzy-clustered engine:
/// y(n) = sum_k [x_s^NF(k) + alpha x_s1^F(k) + (1 - alpha) x_s2^F(k)] g_c(k).
template <typename Scalar, typename Derived>
CVector<Scalar> equalize_fuzzy(
  const Eigen::MatrixBase<Derived> & signal, const FuzzyPlan<Scalar> & plan, const TapProfile<Scalar> & taps,
  Scalar alpha, MultiplyCounter * counter = nullptr)
{
  if (!(alpha >= Scalar(0.5) && alpha <= Scalar(1))) {
    std::ostringstream os;
    os << "alpha must lie in [0.5, 1], got " << alpha;
    throw ParameterError(os.str());
  }
  if (plan.n_points() != taps.n_taps()) {
    std::ostringstream os;
    os << "fuzzy plan covers " << plan.n_points() << " taps but the profile has " << taps.n_taps();
    throw ParameterError(os.str());
  }
  detail::check_signal<Scalar>(signal.size(), taps.n_taps());
  const ClusterAccumulators<Scalar> acc(plan);
  return detail::run_accumulators<Scalar>(
    detail::pad_for_taps<Scalar>(signal, taps.n_taps()), signal.size(), acc, plan.centroids, alpha, counter);
}

/// Equalizer frequency response on an fft_size-point DFT grid.
template <typename Scalar>
CVector<Scalar> fd_response(const FreqDomain<Scalar> & spec)
{
  const Index F = spec.fft_size;
  if (spec.mode == FdMode::analytic) {
    return cd_frequency_response(spec.params, dft_angular_grid(F, spec.params.sampling_period), true);
  }
  // taps placed circularly so that the center tap sits at index 0
  CVector<Scalar> impulse = CVector<Scalar>::Zero(F);
  const Index half        = spec.taps.half_width();
  for (Index k = -half; k <= half; ++k) { impulse((k + F) % F) = spec.taps.at(k); }
  Eigen::FFT<Scalar> fft;
  CVector<Scalar> response(F);
  fft.fwd(response, impulse);
  return response;
}

/// Overlap-save frequency-domain engine with 50 % overlap. Each block of
/// fft_size input samples yields fft_size / 2 outputs, with fft_size / 4
/// samples discarded on each side of the circular result.
template <typename Scalar, typename Derived>
CVector<Scalar> equalize_fd(
  const Eigen::MatrixBase<Derived> & signal, const FreqDomain<Scalar> & spec, MultiplyCounter * counter = nullptr)
{
  const Index F = spec.fft_size;
  if (!detail::is_power_of_two(F) || F < 4) {
    std::ostringstream os;
    os << "fft_size must be a power of two >= 4, got " << F;
    throw ParameterError(os.str());
  }
  detail::require(signal.size() > 0, "signal must be non-empty");
  if (spec.mode == FdMode::taps) {
    if (F / 2 < spec.taps.n_taps()) {
      std::ostringstream os;
      os << "fft_size " << F << " too small for " << spec.taps.n_taps() << " taps (need fft_size / 2 >= n_taps)";
      throw ParameterError(os.str());
    }
  } else {
    spec.params.validate();
  }

  const Index overlap = F / 2;
  const Index step    = F - overlap;
  const Index lead    = overlap / 2;
  const Index n_blocks = (signal.size() + step - 1) / step;

  // lead zeros in front, enough zeros behind to fill the last block
  CVector<Scalar> padded = CVector<Scalar>::Zero(n_blocks * step + overlap);
  padded.segment(lead, signal.size()) = signal;

  const CVector<Scalar> response = fd_response(spec);
  Eigen::FFT<Scalar> fft;
  CVector<Scalar> block(F), spectrum(F), result(F);
  CVector<Scalar> out(n_blocks * step);
  for (Index b = 0; b < n_blocks; ++b) {
    block = padded.segment(b * step, F);
    fft.fwd(spectrum, block);
    spectrum.array() *= response.array();
    fft.inv(result, spectrum);
    out.segment(b * step, step) = result.segment(lead, step);
  }
  if (counter) {
    // radix-2 model: per block 2 transforms of (F/2) log2 F complex products plus F spectral products
    Index log2F = 0;
    while ((Index(1) << log2F) < F) { ++log2F; }
    counter->complex_products += static_cast<std::uint64_t>(n_blocks * (F * log2F + F));
    counter->output_samples += static_cast<std::uint64_t>(signal.size());
  }
  return out.head(signal.size());
}

/// Number of samples at each end of the output affected by zero padding.
template <typename Scalar>
Index transient_length(const EqualizerSpec<Scalar> & spec)
{
  return std::visit(
    [](const auto & s) -> Index {
      using T = std::decay_t<decltype(s)>;
      if constexpr (std::is_same_v<T, FreqDomain<Scalar>>) {
        return s.mode == FdMode::taps ? s.taps.half_width() : (max_taps(s.params) - 1) / 2;
      } else {
        return s.taps.half_width();
      }
    },
    spec);
}

/// Runs whichever engine the spec names.
template <typename Scalar, typename Derived>
CVector<Scalar> equalize(
  const Eigen::MatrixBase<Derived> & signal, const EqualizerSpec<Scalar> & spec, MultiplyCounter * counter = nullptr)
{
  return std::visit(
    [&](const auto & s) -> CVector<Scalar> {
      using T = std::decay_t<decltype(s)>;
      if constexpr (std::is_same_v<T, DirectFir<Scalar>>) {
        return equalize_direct(signal, s.taps, counter);
      } else if constexpr (std::is_same_v<T, Clustered<Scalar>>) {
        return equalize_clustered(signal, s.plan, s.taps, counter);
      } else if constexpr (std::is_same_v<T, FuzzyClustered<Scalar>>) {
        return equalize_fuzzy(signal, s.plan, s.taps, s.alpha, counter);
      } else {
        return equalize_fd(signal, s, counter);
      }
    },
    spec);
}

}  // namespace disperse

#endif  // DISPERSE_EQUALIZERS_HPP_
