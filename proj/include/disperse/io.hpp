#ifndef DISPERSE_IO_HPP_
#define DISPERSE_IO_HPP_

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "disperse/clustering.hpp"
#include "disperse/cd_model.hpp"
#include "disperse/complexity.hpp"
#include "disperse/hyperopt.hpp"

namespace disperse {

/// 17 significant digits; "inf"/"-inf"/"nan" for non-finite values.
std::string format_number(double v);

/// Header `k,re,im`, one row per tap with k centered.
void write_taps_csv(std::ostream & os, const TapProfile<double> & taps);

/// JSON document with centroids [[re, im], ...], entries
/// [{type, nearest, second?, v1?}, ...] and eta.
std::string fuzzy_plan_to_json(const FuzzyPlan<double> & plan);
FuzzyPlan<double> fuzzy_plan_from_json(const std::string & text);

/// Header `engine,parameter,rmps,assumptions`; assumptions joined with ';'.
void write_complexity_csv(std::ostream & os, const std::vector<ComplexityReport> & reports);

/// One row of simulation output.
struct ResultRow
{
  std::string engine;
  long param{};
  long n_clusters{};
  double eta{};
  double alpha{};
  double snr_db{};
  SimResult result;
  /// Seed, or ';'-joined seeds for seed-averaged rows.
  std::string seed;
};

inline constexpr const char * kResultHeader = "engine,param,n_clusters,eta,alpha,snr_db,ber,q_db,evm_percent,rmps,seed";

void write_results_csv(std::ostream & os, const std::vector<ResultRow> & rows);

/// Sweep/optimize table: the result columns plus q_std and is_optimum.
struct SweepCsvRow
{
  ResultRow row;
  double q_std{};
  bool is_optimum{};
};

inline constexpr const char * kSweepHeader =
  "engine,param,n_clusters,eta,alpha,snr_db,ber,q_db,evm_percent,rmps,seed,q_std,is_optimum";

void write_sweep_csv(std::ostream & os, const std::vector<SweepCsvRow> & rows);

/// Scatter of taps and centroids in the complex plane, soft taps marked.
std::string svg_scatter(const CVector<double> & taps, const FuzzyPlan<double> & plan);

struct PlotSeries
{
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  /// Drawn against the right-hand axis.
  bool secondary{};
};

/// Line plot, optional right-hand axis for secondary series.
std::string svg_line_plot(
  const std::string & title, const std::string & x_label, const std::string & y_label,
  const std::string & y2_label, const std::vector<PlotSeries> & series);

/// Provenance written beside every output file.
struct RunManifest
{
  std::string subcommand;
  std::map<std::string, std::string> config;
  std::string version;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> outputs;
  std::string started;
  std::string finished;
};

std::string manifest_to_json(const RunManifest & manifest);

/// ISO-8601 UTC wall-clock time.
std::string utc_timestamp();

}  // namespace disperse

#endif  // DISPERSE_IO_HPP_
