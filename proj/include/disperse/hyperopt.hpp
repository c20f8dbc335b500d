#ifndef DISPERSE_HYPEROPT_HPP_
#define DISPERSE_HYPEROPT_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "disperse/link_sim.hpp"

namespace disperse {

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Each index is
/// visited exactly once; callers write results by index.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)> & body);

/// Evenly spaced grid lo, lo + step, ..., hi with `points` entries.
std::vector<double> linear_grid(double lo, double hi, int points);

/// Received frames for each seed, reused across engine evaluations.
class FrameSet
{
public:
  FrameSet(const LinkConfig & config, const std::vector<std::uint64_t> & seeds, int jobs = 1);

  const std::vector<ReceivedFrame> & frames() const { return frames_; }
  const LinkConfig & config() const { return config_; }

private:
  LinkConfig config_;
  std::vector<ReceivedFrame> frames_;
};

/// Seed-averaged outcome of one engine configuration.
struct PointResult
{
  double q_mean{};
  double q_std{};
  double ber_mean{};
  double evm_mean{};
  double rmps{};
  std::vector<SimResult> per_seed;
};

PointResult evaluate_engine(const FrameSet & frames, const EqualizerSpec<double> & engine);

struct GridEntry
{
  double alpha{};
  double eta{};
  PointResult result;
};

struct AlphaEtaOptimum
{
  double alpha{};
  double eta{};
  double q_db{};
  PointResult best;
  /// Every evaluated point, eta-major then alpha.
  std::vector<GridEntry> grid;
};

/// Exhaustive (alpha, eta) search for the fuzzy engine at n_clusters.
/// Ties in mean Q go to the smaller eta, then the larger alpha.
AlphaEtaOptimum optimize_alpha_eta(
  const FrameSet & frames, const EngineConfig & base, long n_clusters, const std::vector<double> & alpha_grid,
  const std::vector<double> & eta_grid, int jobs = 1);

/// Seeded uniform random search over [alpha_lo, 1] x [eta_lo, 1], same tie-break.
AlphaEtaOptimum random_search_alpha_eta(
  const FrameSet & frames, const EngineConfig & base, long n_clusters, int samples, std::uint64_t seed,
  int jobs = 1);

struct SweepSpec
{
  EngineKind family{EngineKind::fuzzy};
  /// N for direct, N_c for clustered/fuzzy, fft_size for fd.
  std::vector<long> grid;
  LinkConfig link;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  EngineConfig base;
  std::vector<double> alpha_grid{linear_grid(0.5, 1.0, 11)};
  std::vector<double> eta_grid{linear_grid(0.5, 1.0, 11)};
  /// Fuzzy family only: optimize (alpha, eta) per point instead of using base.alpha / base.eta.
  bool optimize{false};
  int jobs{1};

  void validate() const;
};

struct SweepRow
{
  long param{};
  double alpha{};
  double eta{};
  PointResult result;
};

std::vector<SweepRow> sweep(const SweepSpec & spec);
std::vector<SweepRow> sweep(const SweepSpec & spec, const FrameSet & frames);

/// Bisection on snr_db so that `engine` reaches `target_q_db` averaged over
/// the seeds. Returns the calibrated SNR.
double calibrate_snr(
  const LinkConfig & link, const EngineConfig & engine, const std::vector<std::uint64_t> & seeds,
  double target_q_db, double lo_db, double hi_db, double tol_db = 0.01);

}  // namespace disperse

#endif  // DISPERSE_HYPEROPT_HPP_
