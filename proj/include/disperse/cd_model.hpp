#ifndef DISPERSE_CD_MODEL_HPP_
#define DISPERSE_CD_MODEL_HPP_

#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "disperse/types.hpp"

namespace disperse {

inline constexpr double kSpeedOfLight = 299792458.0;

/// Physical link constants, SI units throughout.
///
/// `dispersion` is D in s/m^2. Use `from_engineering` to build from the usual
/// ps/(nm km), nm and km units.
template <typename Scalar = double>
struct SystemParams
{
  Scalar dispersion{};
  Scalar wavelength{};
  Scalar fiber_length{};
  Scalar sampling_period{};
  Scalar light_speed{static_cast<Scalar>(kSpeedOfLight)};

  static SystemParams from_engineering(
    Scalar dispersion_ps_nm_km,
    Scalar wavelength_nm,
    Scalar fiber_length_km,
    Scalar sampling_period_s,
    Scalar light_speed = static_cast<Scalar>(kSpeedOfLight))
  {
    SystemParams p;
    p.dispersion      = dispersion_ps_nm_km * Scalar(1e-6);
    p.wavelength      = wavelength_nm * Scalar(1e-9);
    p.fiber_length    = fiber_length_km * Scalar(1e3);
    p.sampling_period = sampling_period_s;
    p.light_speed     = light_speed;
    return p;
  }

  void validate() const
  {
    detail::require(dispersion != Scalar(0) && std::isfinite(dispersion), "dispersion must be nonzero");
    detail::require(wavelength > Scalar(0), "wavelength must be positive");
    detail::require(fiber_length > Scalar(0), "fiber_length must be positive");
    detail::require(sampling_period > Scalar(0), "sampling_period must be positive");
    detail::require(light_speed > Scalar(0), "light_speed must be positive");
  }

  /// D lambda^2 z, the accumulated dispersion scale in s^2 * (m/s).
  Scalar accumulated() const { return dispersion * wavelength * wavelength * fiber_length; }
};

/// Complex FIR taps of a time-domain dispersion compensator.
///
/// `taps(i)` holds g(k) for the centered index k = i - (n_taps - 1) / 2.
template <typename Scalar = double>
struct TapProfile
{
  CVector<Scalar> taps;
  SystemParams<Scalar> params;

  Index n_taps() const { return taps.size(); }
  Index half_width() const { return (taps.size() - 1) / 2; }
  Index center() const { return half_width(); }

  /// Tap at centered index k.
  Complex<Scalar> at(Index k) const { return taps(center() + k); }
};

/// Largest odd tap count that stays within the Nyquist bound,
/// 2 * floor(|D| lambda^2 z / (2 c T^2)) + 1.
template <typename Scalar>
Index max_taps(const SystemParams<Scalar> & params)
{
  params.validate();
  const Scalar T     = params.sampling_period;
  const Scalar ratio = std::abs(params.accumulated()) / (Scalar(2) * params.light_speed * T * T);
  return 2 * static_cast<Index>(std::floor(ratio)) + 1;
}

/// Time-domain compensating taps
/// g(k) = sqrt(j c T^2 / (D lambda^2 z)) * exp(-j pi c T^2 k^2 / (D lambda^2 z)).
template <typename Scalar>
TapProfile<Scalar> generate_taps(const SystemParams<Scalar> & params, Index n_taps)
{
  const Index limit = max_taps(params);
  if (n_taps < 1 || n_taps % 2 == 0 || n_taps > limit) {
    std::ostringstream os;
    os << "n_taps must be odd and in [1, " << limit << "], got " << n_taps;
    throw ParameterError(os.str());
  }

  const Scalar T     = params.sampling_period;
  const Scalar scale = params.light_speed * T * T / params.accumulated();
  const Complex<Scalar> amplitude = std::sqrt(Complex<Scalar>(0, scale));
  const Scalar phase_rate         = std::numbers::pi_v<Scalar> * scale;

  TapProfile<Scalar> profile;
  profile.params = params;
  profile.taps.resize(n_taps);
  const Index half = (n_taps - 1) / 2;
  for (Index i = 0; i < n_taps; ++i) {
    const auto k = static_cast<Scalar>(i - half);
    profile.taps(i) = amplitude * std::polar(Scalar(1), -phase_rate * k * k);
  }
  return profile;
}

/// All-pass dispersion response at the given angular frequencies (rad/s).
///
/// The forward (channel) response is exp(-j D lambda^2 z w^2 / (4 pi c)) under
/// the exp(+j w t) transform convention used by the FFT; `inverse` returns the
/// conjugate, whose inverse DFT is the tap set of `generate_taps`.
template <typename Scalar, typename Derived>
CVector<Scalar> cd_frequency_response(
  const SystemParams<Scalar> & params, const Eigen::MatrixBase<Derived> & angular_freqs, bool inverse)
{
  params.validate();
  const Scalar coeff = params.accumulated() / (Scalar(4) * std::numbers::pi_v<Scalar> * params.light_speed);
  const Scalar sign  = inverse ? Scalar(1) : Scalar(-1);
  CVector<Scalar> out(angular_freqs.size());
  for (Index i = 0; i < angular_freqs.size(); ++i) {
    const Scalar w = angular_freqs(i);
    out(i)         = std::polar(Scalar(1), sign * coeff * w * w);
  }
  return out;
}

/// Angular frequencies (rad/s) of the bins of an n-point DFT at sampling period T,
/// in FFT order (non-negative first, then negative).
template <typename Scalar>
RVector<Scalar> dft_angular_grid(Index n, Scalar sampling_period)
{
  RVector<Scalar> w(n);
  const Scalar step = Scalar(2) * std::numbers::pi_v<Scalar> / (static_cast<Scalar>(n) * sampling_period);
  for (Index m = 0; m < n; ++m) {
    const Index signed_bin = m < (n + 1) / 2 ? m : m - n;
    w(m)                   = step * static_cast<Scalar>(signed_bin);
  }
  return w;
}

/// Multiplies the spectrum of the zero-padded signal by the dispersion response.
/// The padded length is the next power of two >= 2 * len(signal), so the
/// result is a linear (not circular) application; output length = input length.
template <typename Scalar, typename Derived>
CVector<Scalar> apply_dispersion(
  const Eigen::MatrixBase<Derived> & signal, const SystemParams<Scalar> & params, bool inverse)
{
  params.validate();
  detail::require(signal.size() > 0, "signal must be non-empty");

  const Index padded = static_cast<Index>(detail::next_power_of_two(2 * signal.size()));
  CVector<Scalar> buffer = CVector<Scalar>::Zero(padded);
  buffer.head(signal.size()) = signal;

  Eigen::FFT<Scalar> fft;
  CVector<Scalar> spectrum(padded);
  fft.fwd(spectrum, buffer);
  spectrum.array() *= cd_frequency_response(params, dft_angular_grid(padded, params.sampling_period), inverse).array();
  fft.inv(buffer, spectrum);
  return buffer.head(signal.size());
}

/// Forward-models fiber dispersion on a stream sampled at params.sampling_period.
template <typename Scalar, typename Derived>
CVector<Scalar> apply_channel(const Eigen::MatrixBase<Derived> & signal, const SystemParams<Scalar> & params)
{
  return apply_dispersion(signal, params, false);
}

/// Exact frequency-domain inverse of `apply_channel`.
template <typename Scalar, typename Derived>
CVector<Scalar> remove_channel(const Eigen::MatrixBase<Derived> & signal, const SystemParams<Scalar> & params)
{
  return apply_dispersion(signal, params, true);
}

}  // namespace disperse

#endif  // DISPERSE_CD_MODEL_HPP_
