#ifndef DISPERSE_CONFIG_HPP_
#define DISPERSE_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "disperse/hyperopt.hpp"
#include "disperse/link_sim.hpp"

namespace disperse {

/// Raised for malformed config documents or missing/invalid keys.
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` document. `#` starts a comment; blank lines are ignored.
class ConfigDocument
{
public:
  static ConfigDocument parse(const std::string & text, const std::string & source = "<config>");
  static ConfigDocument load(const std::string & path);

  bool has(const std::string & key) const { return entries_.count(key) != 0; }
  void set(const std::string & key, const std::string & value);

  std::string get_string(const std::string & key) const;
  double get_double(const std::string & key) const;
  long get_long(const std::string & key) const;
  bool get_bool(const std::string & key) const;
  std::vector<double> get_doubles(const std::string & key) const;
  std::vector<long> get_longs(const std::string & key) const;

  std::string get_string(const std::string & key, const std::string & fallback) const;
  double get_double(const std::string & key, double fallback) const;
  long get_long(const std::string & key, long fallback) const;
  bool get_bool(const std::string & key, bool fallback) const;

  /// Keys in sorted order with their values.
  const std::map<std::string, std::string> & values() const { return entries_; }
  std::string source() const { return source_; }

  /// Round-trippable text form, keys sorted.
  std::string to_string() const;

private:
  std::string where(const std::string & key) const;

  std::string source_;
  std::map<std::string, std::string> entries_;
  std::map<std::string, int> lines_;
};

/// SystemParams from dispersion_ps_nm_km, wavelength_nm, fiber_length_km,
/// samples_per_symbol and baud (T = 1 / (baud * samples_per_symbol)).
SystemParams<double> system_from(const ConfigDocument & doc);

LinkConfig link_from(const ConfigDocument & doc);
EngineConfig engine_from(const ConfigDocument & doc);

/// Sweep settings: sweep_grid, seeds, alpha_grid, eta_grid, optimize.
SweepSpec sweep_from(const ConfigDocument & doc);

}  // namespace disperse

#endif  // DISPERSE_CONFIG_HPP_
