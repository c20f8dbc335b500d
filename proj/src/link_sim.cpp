#include "disperse/link_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace disperse {

namespace {

constexpr double kInvSqrt10 = 0.31622776601683794;  // 1 / sqrt(10)
constexpr double kInvSqrt2  = 0.70710678118654752;

// Gray-coded 4-PAM levels indexed by the two bits (b0 b1): 00 -3, 01 -1, 11 +1, 10 +3.
constexpr int kPam4Level[4] = {-3, -1, 3, 1};

int pam4_index(double x)
{
  // returns the 2-bit label of the nearest level in {-3, -1, 1, 3}
  if (x < -2.0) { return 0b00; }
  if (x < 0.0) { return 0b01; }
  if (x < 2.0) { return 0b11; }
  return 0b10;
}

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// "same"-aligned convolution of a complex stream with an odd-length real filter.
CVector<double> filter_same(const CVector<double> & x, const RVector<double> & h)
{
  const Index L    = h.size();
  const Index half = (L - 1) / 2;
  CVector<double> padded = CVector<double>::Zero(x.size() + 2 * half);
  padded.segment(half, x.size()) = x;
  const RVector<double> reversed = h.reverse();
  CVector<double> y(x.size());
  for (Index n = 0; n < x.size(); ++n) {
    const auto seg = padded.segment(n, L);
    y(n)           = Complex<double>(reversed.dot(seg.real()), reversed.dot(seg.imag()));
  }
  return y;
}

bool same_grid(double a, double b) { return std::abs(a - b) <= 1e-9 * std::abs(b); }

double spec_sampling_period(const EqualizerSpec<double> & spec)
{
  return std::visit(
    [](const auto & s) -> double {
      using T = std::decay_t<decltype(s)>;
      if constexpr (std::is_same_v<T, FreqDomain<double>>) {
        return s.mode == FdMode::taps ? s.taps.params.sampling_period : s.params.sampling_period;
      } else {
        return s.taps.params.sampling_period;
      }
    },
    spec);
}

}  // namespace

void LinkConfig::validate() const
{
  detail::require(baud > 0.0, "baud must be positive");
  detail::require(samples_per_symbol >= 2, "samples_per_symbol must be at least 2");
  detail::require(rolloff > 0.0 && rolloff <= 1.0, "rolloff must lie in (0, 1]");
  detail::require(rrc_span_symbols >= 2 && rrc_span_symbols % 2 == 0, "rrc_span_symbols must be even and >= 2");
  detail::require(n_symbols >= 1000, "n_symbols must be at least 1000");
  detail::require(std::isfinite(snr_db), "snr_db must be finite");
  system.validate();
  if (!same_grid(system.sampling_period, sampling_period())) {
    std::ostringstream os;
    os << "system sampling period " << system.sampling_period << " s disagrees with 1 / (baud * sps) = "
       << sampling_period() << " s";
    throw ParameterError(os.str());
  }
}

int bits_per_symbol(Modulation m) { return m == Modulation::qam16 ? 4 : 2; }

Prbs23::Prbs23(std::uint64_t seed)
: state_(static_cast<std::uint32_t>(splitmix64(seed) & 0x7FFFFFu))
{
  if (state_ == 0) { state_ = 1; }
}

std::uint8_t Prbs23::next()
{
  // Fibonacci LFSR, feedback from stages 23 and 18
  const std::uint32_t bit = ((state_ >> 22) ^ (state_ >> 17)) & 1u;
  state_                  = ((state_ << 1) | bit) & 0x7FFFFFu;
  return static_cast<std::uint8_t>(bit);
}

Complex<double> map_symbol(Modulation m, const std::uint8_t * bits)
{
  if (m == Modulation::qpsk) {
    return {(bits[0] ? 1.0 : -1.0) * kInvSqrt2, (bits[1] ? 1.0 : -1.0) * kInvSqrt2};
  }
  const int i = kPam4Level[(bits[0] << 1) | bits[1]];
  const int q = kPam4Level[(bits[2] << 1) | bits[3]];
  return {i * kInvSqrt10, q * kInvSqrt10};
}

void demap_symbol(Modulation m, Complex<double> z, std::uint8_t * bits)
{
  if (m == Modulation::qpsk) {
    bits[0] = z.real() >= 0.0;
    bits[1] = z.imag() >= 0.0;
    return;
  }
  const int i = pam4_index(z.real() / kInvSqrt10);
  const int q = pam4_index(z.imag() / kInvSqrt10);
  bits[0]     = static_cast<std::uint8_t>(i >> 1);
  bits[1]     = static_cast<std::uint8_t>(i & 1);
  bits[2]     = static_cast<std::uint8_t>(q >> 1);
  bits[3]     = static_cast<std::uint8_t>(q & 1);
}

Complex<double> slice(Modulation m, Complex<double> z)
{
  std::uint8_t bits[4];
  demap_symbol(m, z, bits);
  return map_symbol(m, bits);
}

SymbolFrame generate_symbols(const LinkConfig & config)
{
  const int bps = bits_per_symbol(config.modulation);
  SymbolFrame frame;
  frame.bits.resize(static_cast<std::size_t>(config.n_symbols * bps));
  frame.symbols.resize(config.n_symbols);

  Prbs23 prbs(config.seed);
  for (auto & b : frame.bits) { b = prbs.next(); }
  for (Index s = 0; s < config.n_symbols; ++s) {
    frame.symbols(s) = map_symbol(config.modulation, &frame.bits[static_cast<std::size_t>(s * bps)]);
  }
  return frame;
}

RVector<double> rrc_taps(double rolloff, int span_symbols, int samples_per_symbol)
{
  detail::require(rolloff > 0.0 && rolloff <= 1.0, "rolloff must lie in (0, 1]");
  detail::require(span_symbols >= 1 && samples_per_symbol >= 1, "span and samples_per_symbol must be positive");
  detail::require((span_symbols * samples_per_symbol) % 2 == 0, "span * sps must be even for an odd-length filter");

  const double pi   = std::numbers::pi;
  const double b    = rolloff;
  const Index len   = static_cast<Index>(span_symbols) * samples_per_symbol + 1;
  const Index half  = (len - 1) / 2;
  RVector<double> h(len);
  for (Index i = 0; i < len; ++i) {
    const double t = static_cast<double>(i - half) / samples_per_symbol;
    if (i == half) {
      h(i) = 1.0 - b + 4.0 * b / pi;
    } else if (std::abs(1.0 - 16.0 * b * b * t * t) < 1e-10) {
      h(i) = b / std::sqrt(2.0)
           * ((1.0 + 2.0 / pi) * std::sin(pi / (4.0 * b)) + (1.0 - 2.0 / pi) * std::cos(pi / (4.0 * b)));
    } else {
      h(i) = (std::sin(pi * t * (1.0 - b)) + 4.0 * b * t * std::cos(pi * t * (1.0 + b)))
           / (pi * t * (1.0 - 16.0 * b * b * t * t));
    }
  }
  return h / h.norm();
}

double erfc_inv(double y)
{
  if (!(y > 0.0 && y < 2.0)) {
    std::ostringstream os;
    os << "erfc_inv argument must lie in (0, 2), got " << y;
    throw DomainError(os.str());
  }
  // Acklam's rational approximation of the normal quantile at p = y / 2,
  // then erfc^-1(y) = -quantile(y / 2) / sqrt(2)
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  const double p      = y / 2.0;
  const double plow   = 0.02425;
  const double phigh  = 1.0 - plow;
  double z;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
      / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= phigh) {
    const double q = p - 0.5;
    const double r = q * q;
    z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
      / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
      / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double x = -z / std::sqrt(2.0);

  // Newton on erfc(x) - y; d/dx erfc(x) = -2 / sqrt(pi) exp(-x^2)
  for (int it = 0; it < 2; ++it) {
    const double f     = std::erfc(x) - y;
    const double slope = -2.0 / std::sqrt(std::numbers::pi) * std::exp(-x * x);
    x -= f / slope;
  }
  return x;
}

double q_from_ber(double ber)
{
  if (!(ber > 0.0 && ber < 0.5)) {
    std::ostringstream os;
    os << "q_from_ber needs BER in (0, 0.5), got " << ber;
    throw DomainError(os.str());
  }
  return 20.0 * std::log10(std::sqrt(2.0) * erfc_inv(2.0 * ber));
}

ReceivedFrame receive(const LinkConfig & config)
{
  config.validate();
  ReceivedFrame frame;
  frame.config = config;
  frame.tx     = generate_symbols(config);

  const int sps = config.samples_per_symbol;
  const RVector<double> rrc = rrc_taps(config.rolloff, config.rrc_span_symbols, sps);

  CVector<double> upsampled = CVector<double>::Zero(config.n_symbols * sps);
  for (Index s = 0; s < config.n_symbols; ++s) { upsampled(s * sps) = frame.tx.symbols(s); }
  const CVector<double> shaped = filter_same(upsampled, rrc);

  CVector<double> rx = apply_channel(shaped, config.system);

  if (!config.noiseless) {
    // unit-energy pulses: per-sample complex noise variance equals N0 = Es / (Es/N0)
    const double n0    = std::pow(10.0, -config.snr_db / 10.0);
    const double sigma = std::sqrt(n0 / 2.0);
    std::mt19937_64 rng(splitmix64(config.seed ^ 0xA5A5A5A5DEADBEEFULL));
    std::normal_distribution<double> gauss(0.0, sigma);
    for (Index i = 0; i < rx.size(); ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      rx(i) += Complex<double>(re, im);
    }
  }

  frame.samples = filter_same(rx, rrc);
  return frame;
}

SimResult evaluate(const ReceivedFrame & frame, const CVector<double> & equalized, Index transient, double rmps)
{
  const LinkConfig & cfg = frame.config;
  const int sps          = cfg.samples_per_symbol;
  const Index n_sym      = cfg.n_symbols;
  detail::require(equalized.size() == n_sym * sps, "equalized stream length does not match the frame");

  constexpr Index kMaxLag = 8;
  const Index channel_memory = (max_taps(cfg.system) - 1) / 2;
  const Index guard = cfg.rrc_span_symbols + (transient + channel_memory + sps - 1) / sps + kMaxLag + 1;
  if (2 * guard + 64 > n_sym) {
    std::ostringstream os;
    os << "frame of " << n_sym << " symbols is too short for " << guard << " guard symbols per side";
    throw ParameterError(os.str());
  }
  const Index first = guard;
  const Index last  = n_sym - guard;

  // data-aided timing: maximize |sum conj(a_m) y[(m + lag) sps + phase]|
  const Index window = std::min<Index>(4096, last - first);
  Index best_phase = 0, best_lag = 0;
  double best_metric = -1.0;
  for (Index phase = 0; phase < sps; ++phase) {
    for (Index lag = -kMaxLag; lag <= kMaxLag; ++lag) {
      Complex<double> acc{};
      for (Index m = first; m < first + window; ++m) {
        acc += std::conj(frame.tx.symbols(m)) * equalized((m + lag) * sps + phase);
      }
      const double metric = std::abs(acc);
      if (metric > best_metric) {
        best_metric = metric;
        best_phase  = phase;
        best_lag    = lag;
      }
    }
  }

  const Index count = last - first;
  CVector<double> r(count);
  for (Index m = 0; m < count; ++m) { r(m) = equalized((first + m + best_lag) * sps + best_phase); }
  const auto tx = frame.tx.symbols.segment(first, count);

  // least-squares channel gain h = argmin sum |r - h a|^2, then z = r / h.
  // Fitting a ~ g r instead would shrink g by the noise power and bias the
  // 16-QAM decision thresholds.
  const Complex<double> h = tx.dot(r) / tx.squaredNorm();
  const CVector<double> z = r / h;

  const int bps = bits_per_symbol(cfg.modulation);
  long errors   = 0;
  std::uint8_t decided[4];
  for (Index m = 0; m < count; ++m) {
    demap_symbol(cfg.modulation, z(m), decided);
    const auto * sent = &frame.tx.bits[static_cast<std::size_t>((first + m) * bps)];
    for (int b = 0; b < bps; ++b) { errors += decided[b] != sent[b]; }
  }

  SimResult result;
  result.n_bits       = static_cast<long>(count) * bps;
  result.n_bit_errors = errors;
  result.ber          = static_cast<double>(errors) / static_cast<double>(result.n_bits);
  result.q_db         = errors == 0 ? std::numeric_limits<double>::infinity() : q_from_ber(std::min(result.ber, 0.4999999));
  result.evm_percent  = 100.0 * std::sqrt((z - tx).squaredNorm() / tx.squaredNorm());
  result.rmps         = rmps;
  return result;
}

double rmps_of(const EqualizerSpec<double> & spec)
{
  return std::visit(
    [](const auto & s) -> double {
      using T = std::decay_t<decltype(s)>;
      if constexpr (std::is_same_v<T, DirectFir<double>>) {
        return rmps_td(s.taps.n_taps());
      } else if constexpr (std::is_same_v<T, Clustered<double>> || std::is_same_v<T, FuzzyClustered<double>>) {
        return rmps_clustered(s.plan.n_clusters());
      } else {
        return rmps_fd(s.fft_size);
      }
    },
    spec);
}

SimResult run_link(const LinkConfig & config, const EqualizerSpec<double> & equalizer)
{
  config.validate();
  if (!same_grid(spec_sampling_period(equalizer), config.sampling_period())) {
    throw ParameterError("equalizer was designed for a different sampling period than the link");
  }
  const ReceivedFrame frame     = receive(config);
  const CVector<double> output = equalize(frame.samples, equalizer);
  return evaluate(frame, output, transient_length(equalizer), rmps_of(equalizer));
}

EqualizerSpec<double> make_equalizer(const EngineConfig & engine, const SystemParams<double> & system)
{
  const Index n_taps = engine.n_taps > 0 ? static_cast<Index>(engine.n_taps) : max_taps(system);
  switch (engine.kind) {
    case EngineKind::direct: return DirectFir<double>{generate_taps(system, n_taps)};
    case EngineKind::clustered: {
      auto taps = generate_taps(system, n_taps);
      auto plan = kmeans(taps.taps, engine.n_clusters, engine.kmeans_seed, engine.kmeans);
      return Clustered<double>{std::move(plan), std::move(taps)};
    }
    case EngineKind::fuzzy: {
      auto taps  = generate_taps(system, n_taps);
      auto plan  = kmeans(taps.taps, engine.n_clusters, engine.kmeans_seed, engine.kmeans);
      auto fuzzy = fuzzify(plan, taps.taps, engine.eta);
      if (!(engine.alpha >= 0.5 && engine.alpha <= 1.0)) {
        throw ParameterError("alpha must lie in [0.5, 1]");
      }
      return FuzzyClustered<double>{std::move(fuzzy), std::move(taps), engine.alpha};
    }
    case EngineKind::freq_domain: {
      FreqDomain<double> fd;
      fd.fft_size = engine.fft_size;
      fd.mode     = engine.fd_mode;
      fd.params   = system;
      if (fd.mode == FdMode::taps) { fd.taps = generate_taps(system, n_taps); }
      return fd;
    }
  }
  throw ParameterError("unknown engine kind");
}

}  // namespace disperse
