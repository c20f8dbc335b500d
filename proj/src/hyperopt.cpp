#include "disperse/hyperopt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

namespace disperse {

namespace {

bool better(const GridEntry & a, const GridEntry & b)
{
  if (a.result.q_mean != b.result.q_mean) { return a.result.q_mean > b.result.q_mean; }
  if (a.eta != b.eta) { return a.eta < b.eta; }
  return a.alpha > b.alpha;
}

void check_grid(const std::vector<double> & grid, double lo, const char * name)
{
  if (grid.empty()) { throw ParameterError(std::string(name) + " grid is empty"); }
  for (double v : grid) {
    if (!(v >= lo && v <= 1.0)) {
      std::ostringstream os;
      os << name << " grid value " << v << " outside [" << lo << ", 1]";
      throw ParameterError(os.str());
    }
  }
}

AlphaEtaOptimum search(
  const FrameSet & frames, const EngineConfig & base, long n_clusters,
  const std::vector<std::pair<double, double>> & points, int jobs)
{
  const TapProfile<double> taps =
    generate_taps(frames.config().system, base.n_taps > 0 ? base.n_taps : max_taps(frames.config().system));
  const ClusterPlan<double> plan = kmeans(taps.taps, n_clusters, base.kmeans_seed, base.kmeans);

  AlphaEtaOptimum out;
  out.grid.resize(points.size());
  parallel_for(points.size(), jobs, [&](std::size_t i) {
    const auto [alpha, eta] = points[i];
    FuzzyClustered<double> engine{fuzzify(plan, taps.taps, eta), taps, alpha};
    out.grid[i] = GridEntry{alpha, eta, evaluate_engine(frames, engine)};
  });

  const auto best = std::min_element(out.grid.begin(), out.grid.end(), better);
  out.alpha       = best->alpha;
  out.eta         = best->eta;
  out.q_db        = best->result.q_mean;
  out.best        = best->result;
  return out;
}

}  // namespace

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)> & body)
{
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) { body(i); }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count && !failed; i = next++) {
          try {
            body(i);
          } catch (...) {
            if (!failed.exchange(true)) { failure = std::current_exception(); }
          }
        }
      });
    }
  }
  if (failure) { std::rethrow_exception(failure); }
}

std::vector<double> linear_grid(double lo, double hi, int points)
{
  detail::require(points >= 1, "grid needs at least one point");
  std::vector<double> grid(static_cast<std::size_t>(points));
  if (points == 1) {
    grid[0] = lo;
    return grid;
  }
  for (int i = 0; i < points; ++i) { grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1); }
  grid.back() = hi;
  return grid;
}

FrameSet::FrameSet(const LinkConfig & config, const std::vector<std::uint64_t> & seeds, int jobs)
: config_(config)
{
  detail::require(!seeds.empty(), "at least one seed is required");
  frames_.resize(seeds.size());
  parallel_for(seeds.size(), jobs, [&](std::size_t i) {
    LinkConfig c = config;
    c.seed       = seeds[i];
    frames_[i]   = receive(c);
  });
}

PointResult evaluate_engine(const FrameSet & frames, const EqualizerSpec<double> & engine)
{
  PointResult r;
  r.rmps                = rmps_of(engine);
  const Index transient = transient_length(engine);
  for (const auto & frame : frames.frames()) {
    r.per_seed.push_back(evaluate(frame, equalize(frame.samples, engine), transient, r.rmps));
  }
  const double n = static_cast<double>(r.per_seed.size());
  for (const auto & s : r.per_seed) {
    r.q_mean += s.q_db / n;
    r.ber_mean += s.ber / n;
    r.evm_mean += s.evm_percent / n;
  }
  if (r.per_seed.size() > 1 && std::isfinite(r.q_mean)) {
    double var = 0;
    for (const auto & s : r.per_seed) { var += (s.q_db - r.q_mean) * (s.q_db - r.q_mean); }
    r.q_std = std::sqrt(var / (n - 1));
  }
  return r;
}

AlphaEtaOptimum optimize_alpha_eta(
  const FrameSet & frames, const EngineConfig & base, long n_clusters, const std::vector<double> & alpha_grid,
  const std::vector<double> & eta_grid, int jobs)
{
  check_grid(alpha_grid, 0.5, "alpha");
  check_grid(eta_grid, 0.0, "eta");
  std::vector<std::pair<double, double>> points;
  for (double eta : eta_grid) {
    for (double alpha : alpha_grid) { points.emplace_back(alpha, eta); }
  }
  return search(frames, base, n_clusters, points, jobs);
}

AlphaEtaOptimum random_search_alpha_eta(
  const FrameSet & frames, const EngineConfig & base, long n_clusters, int samples, std::uint64_t seed, int jobs)
{
  detail::require(samples >= 1, "random search needs at least one sample");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.5, 1.0);
  std::vector<std::pair<double, double>> points;
  for (int i = 0; i < samples; ++i) {
    const double alpha = unit(rng);
    const double eta   = unit(rng);
    points.emplace_back(alpha, eta);
  }
  return search(frames, base, n_clusters, points, jobs);
}

void SweepSpec::validate() const
{
  detail::require(!grid.empty(), "sweep grid is empty");
  detail::require(std::is_sorted(grid.begin(), grid.end()), "sweep grid must be sorted ascending");
  detail::require(!seeds.empty(), "sweep needs at least one seed");
  detail::require(std::is_sorted(alpha_grid.begin(), alpha_grid.end()), "alpha grid must be sorted ascending");
  detail::require(std::is_sorted(eta_grid.begin(), eta_grid.end()), "eta grid must be sorted ascending");
  check_grid(alpha_grid, 0.5, "alpha");
  check_grid(eta_grid, 0.0, "eta");
  link.validate();
}

std::vector<SweepRow> sweep(const SweepSpec & spec)
{
  spec.validate();
  const FrameSet frames(spec.link, spec.seeds, spec.jobs);
  return sweep(spec, frames);
}

std::vector<SweepRow> sweep(const SweepSpec & spec, const FrameSet & frames)
{
  spec.validate();
  std::vector<SweepRow> rows(spec.grid.size());
  const auto & system = frames.config().system;

  if (spec.family == EngineKind::fuzzy && spec.optimize) {
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
      const auto opt = optimize_alpha_eta(frames, spec.base, spec.grid[i], spec.alpha_grid, spec.eta_grid, spec.jobs);
      rows[i]        = SweepRow{spec.grid[i], opt.alpha, opt.eta, opt.best};
    }
    return rows;
  }

  parallel_for(spec.grid.size(), spec.jobs, [&](std::size_t i) {
    EngineConfig engine = spec.base;
    engine.kind         = spec.family;
    switch (spec.family) {
      case EngineKind::direct: engine.n_taps = spec.grid[i]; break;
      case EngineKind::clustered:
      case EngineKind::fuzzy: engine.n_clusters = spec.grid[i]; break;
      case EngineKind::freq_domain: engine.fft_size = spec.grid[i]; break;
    }
    const auto eq = make_equalizer(engine, system);
    const bool fuzzy = spec.family == EngineKind::fuzzy;
    rows[i] = SweepRow{spec.grid[i], fuzzy ? engine.alpha : 1.0, fuzzy ? engine.eta : 0.0, evaluate_engine(frames, eq)};
  });
  return rows;
}

double calibrate_snr(
  const LinkConfig & link, const EngineConfig & engine, const std::vector<std::uint64_t> & seeds,
  double target_q_db, double lo_db, double hi_db, double tol_db)
{
  detail::require(lo_db < hi_db, "calibration bracket is empty");
  const auto eq = make_equalizer(engine, link.system);
  auto q_at     = [&](double snr) {
    LinkConfig c = link;
    c.snr_db     = snr;
    return evaluate_engine(FrameSet(c, seeds), eq).q_mean;
  };
  while (hi_db - lo_db > tol_db) {
    const double mid = 0.5 * (lo_db + hi_db);
    if (q_at(mid) < target_q_db) {
      lo_db = mid;
    } else {
      hi_db = mid;
    }
  }
  return 0.5 * (lo_db + hi_db);
}

}  // namespace disperse
