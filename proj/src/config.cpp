#include "disperse/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace disperse {

namespace {

std::string trim(const std::string & s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) { return {}; }
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string & s)
{
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) { out.push_back(item); }
  }
  return out;
}

}  // namespace

ConfigDocument ConfigDocument::parse(const std::string & text, const std::string & source)
{
  ConfigDocument doc;
  doc.source_ = source;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) { line.erase(hash); }
    line = trim(line);
    if (line.empty()) { continue; }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream os;
      os << source << ":" << lineno << ": expected 'key = value', got '" << line << "'";
      throw ConfigError(os.str());
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      std::ostringstream os;
      os << source << ":" << lineno << ": empty key";
      throw ConfigError(os.str());
    }
    if (doc.entries_.count(key)) {
      std::ostringstream os;
      os << source << ":" << lineno << ": duplicate key '" << key << "' (first set on line " << doc.lines_[key] << ")";
      throw ConfigError(os.str());
    }
    doc.entries_[key] = trim(line.substr(eq + 1));
    doc.lines_[key]   = lineno;
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::string & path)
{
  std::ifstream in(path);
  if (!in) { throw ConfigError("cannot open config file '" + path + "'"); }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void ConfigDocument::set(const std::string & key, const std::string & value)
{
  entries_[key] = value;
  lines_.erase(key);
}

std::string ConfigDocument::where(const std::string & key) const
{
  std::ostringstream os;
  os << source_;
  if (auto it = lines_.find(key); it != lines_.end()) { os << ":" << it->second; }
  os << ": key '" << key << "'";
  return os.str();
}

std::string ConfigDocument::get_string(const std::string & key) const
{
  auto it = entries_.find(key);
  if (it == entries_.end()) { throw ConfigError(source_ + ": missing required key '" + key + "'"); }
  return it->second;
}

double ConfigDocument::get_double(const std::string & key) const
{
  const std::string v = get_string(key);
  try {
    std::size_t used = 0;
    const double d   = std::stod(v, &used);
    if (used != v.size()) { throw std::invalid_argument(v); }
    return d;
  } catch (const std::exception &) {
    throw ConfigError(where(key) + ": expected a number, got '" + v + "'");
  }
}

long ConfigDocument::get_long(const std::string & key) const
{
  const std::string v = get_string(key);
  long out            = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec == std::errc() && ptr == v.data() + v.size()) { return out; }
  // accept integral values written in floating notation, e.g. 1e5
  const double d = get_double(key);
  if (d != static_cast<double>(static_cast<long>(d))) {
    throw ConfigError(where(key) + ": expected an integer, got '" + v + "'");
  }
  return static_cast<long>(d);
}

bool ConfigDocument::get_bool(const std::string & key) const
{
  const std::string v = get_string(key);
  if (v == "1" || v == "true" || v == "yes" || v == "on") { return true; }
  if (v == "0" || v == "false" || v == "no" || v == "off") { return false; }
  throw ConfigError(where(key) + ": expected a boolean, got '" + v + "'");
}

std::vector<double> ConfigDocument::get_doubles(const std::string & key) const
{
  std::vector<double> out;
  for (const auto & item : split_list(get_string(key))) {
    ConfigDocument tmp;
    tmp.source_        = source_;
    tmp.entries_[key]  = item;
    if (auto it = lines_.find(key); it != lines_.end()) { tmp.lines_[key] = it->second; }
    out.push_back(tmp.get_double(key));
  }
  if (out.empty()) { throw ConfigError(where(key) + ": empty list"); }
  return out;
}

std::vector<long> ConfigDocument::get_longs(const std::string & key) const
{
  std::vector<long> out;
  for (const auto & item : split_list(get_string(key))) {
    ConfigDocument tmp;
    tmp.source_       = source_;
    tmp.entries_[key] = item;
    if (auto it = lines_.find(key); it != lines_.end()) { tmp.lines_[key] = it->second; }
    out.push_back(tmp.get_long(key));
  }
  if (out.empty()) { throw ConfigError(where(key) + ": empty list"); }
  return out;
}

std::string ConfigDocument::get_string(const std::string & key, const std::string & fallback) const
{
  return has(key) ? get_string(key) : fallback;
}

double ConfigDocument::get_double(const std::string & key, double fallback) const
{
  return has(key) ? get_double(key) : fallback;
}

long ConfigDocument::get_long(const std::string & key, long fallback) const
{
  return has(key) ? get_long(key) : fallback;
}

bool ConfigDocument::get_bool(const std::string & key, bool fallback) const
{
  return has(key) ? get_bool(key) : fallback;
}

std::string ConfigDocument::to_string() const
{
  std::ostringstream os;
  for (const auto & [k, v] : entries_) { os << k << " = " << v << "\n"; }
  return os.str();
}

SystemParams<double> system_from(const ConfigDocument & doc)
{
  const double baud = doc.get_double("baud");
  const long sps    = doc.get_long("samples_per_symbol");
  if (baud <= 0.0) { throw ConfigError(doc.source() + ": key 'baud' must be positive"); }
  if (sps < 1) { throw ConfigError(doc.source() + ": key 'samples_per_symbol' must be positive"); }
  // read in a fixed order so the first missing key is the one reported
  const double dispersion = doc.get_double("dispersion_ps_nm_km");
  const double wavelength = doc.get_double("wavelength_nm");
  const double length     = doc.get_double("fiber_length_km");
  const double c          = doc.get_double("light_speed", kSpeedOfLight);
  auto params = SystemParams<double>::from_engineering(dispersion, wavelength, length, 1.0 / (baud * static_cast<double>(sps)), c);
  try {
    params.validate();
  } catch (const ParameterError & e) {
    throw ConfigError(doc.source() + ": " + e.what());
  }
  return params;
}

LinkConfig link_from(const ConfigDocument & doc)
{
  LinkConfig c;
  c.baud               = doc.get_double("baud");
  c.samples_per_symbol = static_cast<int>(doc.get_long("samples_per_symbol"));
  const std::string mod = doc.get_string("modulation", "16qam");
  if (mod == "16qam" || mod == "16QAM") {
    c.modulation = Modulation::qam16;
  } else if (mod == "qpsk" || mod == "QPSK") {
    c.modulation = Modulation::qpsk;
  } else {
    throw ConfigError(doc.source() + ": key 'modulation' must be 16qam or qpsk, got '" + mod + "'");
  }
  c.rolloff          = doc.get_double("rolloff", c.rolloff);
  c.rrc_span_symbols = static_cast<int>(doc.get_long("rrc_span_symbols", c.rrc_span_symbols));
  c.n_symbols        = doc.get_long("n_symbols", c.n_symbols);
  c.snr_db           = doc.get_double("snr_db", c.snr_db);
  c.seed             = static_cast<std::uint64_t>(doc.get_long("seed", static_cast<long>(c.seed)));
  c.noiseless        = doc.get_bool("noiseless", false);
  c.system           = system_from(doc);
  return c;
}

EngineConfig engine_from(const ConfigDocument & doc)
{
  EngineConfig e;
  try {
    e.kind = engine_from_string(doc.get_string("engine", "direct"));
  } catch (const ParameterError & err) {
    throw ConfigError(doc.source() + ": key 'engine': " + err.what());
  }
  e.n_taps      = doc.get_long("n_taps", e.n_taps);
  e.n_clusters  = doc.get_long("n_clusters", e.n_clusters);
  e.eta         = doc.get_double("eta", e.eta);
  e.alpha       = doc.get_double("alpha", e.alpha);
  e.fft_size    = doc.get_long("fft_size", e.fft_size);
  const std::string mode = doc.get_string("fd_mode", "analytic");
  if (mode == "analytic") {
    e.fd_mode = FdMode::analytic;
  } else if (mode == "taps") {
    e.fd_mode = FdMode::taps;
  } else {
    throw ConfigError(doc.source() + ": key 'fd_mode' must be analytic or taps, got '" + mode + "'");
  }
  e.kmeans_seed        = static_cast<std::uint64_t>(doc.get_long("kmeans_seed", static_cast<long>(e.kmeans_seed)));
  e.kmeans.max_iter    = static_cast<int>(doc.get_long("kmeans_max_iter", e.kmeans.max_iter));
  e.kmeans.tol         = doc.get_double("kmeans_tol", e.kmeans.tol);
  e.kmeans.renormalize = doc.get_bool("kmeans_renormalize", e.kmeans.renormalize);
  return e;
}

SweepSpec sweep_from(const ConfigDocument & doc)
{
  SweepSpec s;
  s.link   = link_from(doc);
  s.base   = engine_from(doc);
  s.family = s.base.kind;
  if (doc.has("sweep_grid")) {
    s.grid = doc.get_longs("sweep_grid");
  } else {
    switch (s.family) {
      case EngineKind::direct: s.grid = {s.base.n_taps > 0 ? s.base.n_taps : max_taps(s.link.system)}; break;
      case EngineKind::clustered:
      case EngineKind::fuzzy: s.grid = {s.base.n_clusters}; break;
      case EngineKind::freq_domain: s.grid = {s.base.fft_size}; break;
    }
  }
  if (doc.has("seeds")) {
    s.seeds.clear();
    for (long v : doc.get_longs("seeds")) { s.seeds.push_back(static_cast<std::uint64_t>(v)); }
  }
  if (doc.has("alpha_grid")) { s.alpha_grid = doc.get_doubles("alpha_grid"); }
  if (doc.has("eta_grid")) { s.eta_grid = doc.get_doubles("eta_grid"); }
  s.optimize = doc.get_bool("optimize", false);
  return s;
}

}  // namespace disperse
