#ifndef DISPERSE_LINK_SIM_HPP_
#define DISPERSE_LINK_SIM_HPP_

#include <cstdint>
#include <limits>
#include <vector>

#include "disperse/cd_model.hpp"
#include "disperse/clustering.hpp"
#include "disperse/complexity.hpp"
#include "disperse/equalizers.hpp"

namespace disperse {

enum class Modulation { qpsk, qam16 };

/// Simulated single-polarization coherent link: shaping, dispersion, AWGN
/// and matched filtering ahead of the equalizer under test.
struct LinkConfig
{
  double baud{20e9};
  int samples_per_symbol{2};
  Modulation modulation{Modulation::qam16};
  double rolloff{0.1};
  int rrc_span_symbols{64};
  long n_symbols{100000};
  /// Es/N0 per symbol, dB.
  double snr_db{20.0};
  std::uint64_t seed{1};
  /// Skip noise injection entirely.
  bool noiseless{false};
  SystemParams<double> system;

  double sampling_period() const { return 1.0 / (baud * samples_per_symbol); }

  void validate() const;
};

/// Equalizer choice in configuration terms. Zero n_taps means max_taps.
struct EngineConfig
{
  EngineKind kind{EngineKind::direct};
  long n_taps{0};
  long n_clusters{12};
  double eta{0.8};
  double alpha{0.8};
  long fft_size{512};
  FdMode fd_mode{FdMode::analytic};
  std::uint64_t kmeans_seed{7};
  KMeansOptions kmeans;
};

struct SimResult
{
  double ber{};
  /// +infinity when no bit errors were counted.
  double q_db{};
  double evm_percent{};
  double rmps{};
  long n_bit_errors{};
  long n_bits{};

  bool error_free() const { return n_bit_errors == 0; }
};

struct SymbolFrame
{
  CVector<double> symbols;
  std::vector<std::uint8_t> bits;
};

int bits_per_symbol(Modulation m);

/// Maximal-length PRBS from the degree-23 LFSR x^23 + x^18 + 1.
class Prbs23
{
public:
  explicit Prbs23(std::uint64_t seed);
  std::uint8_t next();

private:
  std::uint32_t state_;
};

/// Gray-mapped, unit average energy constellation point for `bits`.
Complex<double> map_symbol(Modulation m, const std::uint8_t * bits);

/// Nearest constellation point decision, writing bits_per_symbol bits.
void demap_symbol(Modulation m, Complex<double> z, std::uint8_t * bits);

Complex<double> slice(Modulation m, Complex<double> z);

/// Seeded PRBS bits Gray-mapped onto config.n_symbols constellation points.
SymbolFrame generate_symbols(const LinkConfig & config);

/// Root-raised-cosine impulse response of span * sps + 1 taps (span*sps even),
/// unit energy.
RVector<double> rrc_taps(double rolloff, int span_symbols, int samples_per_symbol);

/// Inverse complementary error function on (0, 2).
double erfc_inv(double y);

/// Q-factor in dB, 20 log10(sqrt(2) erfc^-1(2 BER)), for BER in (0, 0.5).
double q_from_ber(double ber);

/// Matched-filtered received stream at samples_per_symbol, ready for CDC.
struct ReceivedFrame
{
  LinkConfig config;
  SymbolFrame tx;
  CVector<double> samples;
};

/// Everything in the link up to and including the matched filter.
ReceivedFrame receive(const LinkConfig & config);

/// Timing recovery, complex gain correction, decisions and metrics on an
/// equalized stream. `transient` samples at each end are excluded.
SimResult evaluate(const ReceivedFrame & frame, const CVector<double> & equalized, Index transient, double rmps);

/// Full chain for one engine.
SimResult run_link(const LinkConfig & config, const EqualizerSpec<double> & equalizer);

/// Builds an engine for the link's sampling grid.
EqualizerSpec<double> make_equalizer(const EngineConfig & engine, const SystemParams<double> & system);

double rmps_of(const EqualizerSpec<double> & spec);

}  // namespace disperse

#endif  // DISPERSE_LINK_SIM_HPP_
