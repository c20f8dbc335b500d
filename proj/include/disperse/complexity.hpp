#ifndef DISPERSE_COMPLEXITY_HPP_
#define DISPERSE_COMPLEXITY_HPP_

#include <string>
#include <vector>

namespace disperse {

/// Real multiplications per equalized symbol (RMPS), closed form.
/// Every complex product is costed at 3 real multiplications (Karatsuba).

/// Folded symmetric FIR: 3 (N - 1) / 2.
double rmps_td(long n_taps);

/// Hard or fuzzy clustered FIR: 3 N_c. The fuzzy weights come from a
/// look-up table and are not counted.
double rmps_clustered(long n_clusters);

/// Radix-2 overlap-save: F (3 log2 F + 3) / (F - overlap + 1).
double rmps_fd(long fft_size, long overlap);
double rmps_fd(long fft_size);

/// 1 - candidate / reference.
double complexity_saving(double candidate_rmps, double reference_rmps);

enum class EngineKind { direct, clustered, fuzzy, freq_domain };

std::string to_string(EngineKind kind);
EngineKind engine_from_string(const std::string & name);

struct ComplexityReport
{
  EngineKind engine{};
  long parameter{};
  double rmps{};
  std::vector<std::string> assumptions;
};

/// `parameter` is N for direct, N_c for the clustered engines, and the FFT
/// size (50 % overlap) for the frequency-domain engine.
ComplexityReport complexity_report(EngineKind engine, long parameter);

}  // namespace disperse

#endif  // DISPERSE_COMPLEXITY_HPP_
