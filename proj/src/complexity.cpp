#include "disperse/complexity.hpp"

#include <cmath>
#include <sstream>

#include "disperse/types.hpp"

namespace disperse {

double rmps_td(long n_taps)
{
  if (n_taps < 1 || n_taps % 2 == 0) {
    std::ostringstream os;
    os << "rmps_td needs an odd positive tap count, got " << n_taps;
    throw ParameterError(os.str());
  }
  return 3.0 * static_cast<double>(n_taps - 1) / 2.0;
}

double rmps_clustered(long n_clusters)
{
  detail::require(n_clusters >= 1, "rmps_clustered needs at least one cluster");
  return 3.0 * static_cast<double>(n_clusters);
}

double rmps_fd(long fft_size, long overlap)
{
  if (!detail::is_power_of_two(fft_size)) {
    std::ostringstream os;
    os << "fft_size must be a power of two, got " << fft_size;
    throw ParameterError(os.str());
  }
  if (overlap < 1 || overlap >= fft_size) {
    std::ostringstream os;
    os << "overlap must lie in [1, fft_size), got " << overlap << " for fft_size " << fft_size;
    throw ParameterError(os.str());
  }
  const double F = static_cast<double>(fft_size);
  return F * (3.0 * std::log2(F) + 3.0) / (F - static_cast<double>(overlap) + 1.0);
}

double rmps_fd(long fft_size) { return rmps_fd(fft_size, fft_size / 2); }

double complexity_saving(double candidate_rmps, double reference_rmps)
{
  detail::require(reference_rmps > 0.0, "reference complexity must be positive");
  return 1.0 - candidate_rmps / reference_rmps;
}

std::string to_string(EngineKind kind)
{
  switch (kind) {
    case EngineKind::direct: return "direct";
    case EngineKind::clustered: return "clustered";
    case EngineKind::fuzzy: return "fuzzy";
    case EngineKind::freq_domain: return "fd";
  }
  return "unknown";
}

EngineKind engine_from_string(const std::string & name)
{
  if (name == "direct" || name == "td") { return EngineKind::direct; }
  if (name == "clustered" || name == "hard") { return EngineKind::clustered; }
  if (name == "fuzzy") { return EngineKind::fuzzy; }
  if (name == "fd" || name == "freq_domain") { return EngineKind::freq_domain; }
  throw ParameterError("unknown engine '" + name + "' (expected direct, clustered, fuzzy or fd)");
}

ComplexityReport complexity_report(EngineKind engine, long parameter)
{
  ComplexityReport r;
  r.engine    = engine;
  r.parameter = parameter;
  switch (engine) {
    case EngineKind::direct:
      r.rmps        = rmps_td(parameter);
      r.assumptions = {"Karatsuba", "symmetric folding"};
      break;
    case EngineKind::clustered:
      r.rmps        = rmps_clustered(parameter);
      r.assumptions = {"Karatsuba"};
      break;
    case EngineKind::fuzzy:
      r.rmps        = rmps_clustered(parameter);
      r.assumptions = {"Karatsuba", "alpha weights in look-up table"};
      break;
    case EngineKind::freq_domain:
      r.rmps        = rmps_fd(parameter);
      r.assumptions = {"Karatsuba", "radix-2", "50% overlap"};
      break;
  }
  return r;
}

}  // namespace disperse
