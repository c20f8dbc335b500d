// disperse: batch front end for tap design, clustering, complexity accounting
// and simulated-link sweeps.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "disperse/config.hpp"
#include "disperse/io.hpp"

namespace fs = std::filesystem;
using namespace disperse;

namespace {

/// Error tagged with the pipeline stage that produced it.
struct StageError : std::runtime_error
{
  StageError(const std::string & stage, const std::string & what) : std::runtime_error(stage + ": " + what) {}
};

template <typename F>
auto stage(const std::string & name, F && f) -> decltype(f())
{
  try {
    return f();
  } catch (const StageError &) {
    throw;
  } catch (const std::exception & e) {
    throw StageError(name, e.what());
  }
}

struct CommonOptions
{
  std::string config_path;
  std::string manifest_path;
  std::vector<std::string> overrides;
  long seed{-1};
  int jobs{1};
  std::string out_dir{"."};
  bool svg{false};
};

void add_common(CLI::App * cmd, CommonOptions & o, bool needs_config = true)
{
  if (needs_config) {
    cmd->add_option("--config", o.config_path, "Config file (default: $DISPERSE_DEFAULT_CONFIG)");
    cmd->add_option("--manifest", o.manifest_path, "Re-run with the config snapshot of an earlier manifest")
      ->excludes("--config");
    cmd->add_option("--set", o.overrides, "Override a config key, KEY=VALUE (repeatable)");
    cmd->add_option("--seed", o.seed, "Seed override");
    cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  }
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_flag("--svg", o.svg, "Also write an SVG plot");
}

ConfigDocument from_manifest(const std::string & path)
{
  std::ifstream in(path);
  if (!in) { throw ConfigError("cannot open manifest '" + path + "'"); }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception & e) {
    throw ConfigError("invalid manifest '" + path + "': " + e.what());
  }
  ConfigDocument config = ConfigDocument::parse("", path);
  for (const auto & [key, value] : doc.at("config").items()) { config.set(key, value.get<std::string>()); }
  return config;
}

ConfigDocument load_document(const CommonOptions & o)
{
  if (!o.manifest_path.empty()) { return from_manifest(o.manifest_path); }
  std::string path = o.config_path;
  if (path.empty()) {
    if (const char * env = std::getenv("DISPERSE_DEFAULT_CONFIG")) { path = env; }
  }
  if (path.empty()) { throw ConfigError("no config given (use --config or set DISPERSE_DEFAULT_CONFIG)"); }
  ConfigDocument doc = ConfigDocument::load(path);
  for (const auto & kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) { throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'"); }
    doc.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed >= 0) {
    // a single seed also replaces the sweep seed set unless one is configured
    doc.set("seed", std::to_string(o.seed));
    if (!doc.has("seeds")) { doc.set("seeds", std::to_string(o.seed)); }
  }
  return doc;
}

/// Writes `content` to out_dir/name plus a manifest sidecar; returns the path.
class OutputWriter
{
public:
  OutputWriter(const CommonOptions & o, std::string subcommand, const ConfigDocument * doc)
  : dir_(o.out_dir)
  {
    manifest_.subcommand = std::move(subcommand);
    manifest_.version    = DISPERSE_VERSION;
    manifest_.started    = utc_timestamp();
    if (doc) { manifest_.config = doc->values(); }
  }

  void seeds(std::vector<std::uint64_t> s) { manifest_.seeds = std::move(s); }

  std::string write(const std::string & name, const std::string & content)
  {
    fs::create_directories(dir_);
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) { throw StageError("write", "cannot write " + path.string()); }
    manifest_.outputs.push_back(path.string());
    written_.push_back(path);
    return path.string();
  }

  void finish()
  {
    manifest_.finished = utc_timestamp();
    const std::string json = manifest_to_json(manifest_);
    for (const auto & p : written_) {
      std::ofstream side(p.string() + ".manifest.json", std::ios::binary);
      side << json;
      if (!side) { throw StageError("write", "cannot write manifest for " + p.string()); }
    }
  }

private:
  fs::path dir_;
  RunManifest manifest_;
  std::vector<fs::path> written_;
};

std::string seeds_label(const std::vector<std::uint64_t> & seeds)
{
  std::string s;
  for (std::size_t i = 0; i < seeds.size(); ++i) { s += (i ? ";" : "") + std::to_string(seeds[i]); }
  return s;
}

long engine_param(const EngineConfig & e, const SystemParams<double> & system)
{
  switch (e.kind) {
    case EngineKind::direct: return e.n_taps > 0 ? e.n_taps : static_cast<long>(max_taps(system));
    case EngineKind::clustered:
    case EngineKind::fuzzy: return e.n_clusters;
    case EngineKind::freq_domain: return e.fft_size;
  }
  return 0;
}

ResultRow make_row(EngineKind kind, long param, double eta, double alpha, const LinkConfig & link, const SimResult & r,
                   const std::string & seed)
{
  ResultRow row;
  row.engine     = to_string(kind);
  row.param      = param;
  row.n_clusters = (kind == EngineKind::clustered || kind == EngineKind::fuzzy) ? param : 0;
  row.eta        = eta;
  row.alpha      = alpha;
  row.snr_db     = link.snr_db;
  row.result     = r;
  row.seed       = seed;
  return row;
}

SimResult averaged(const PointResult & p)
{
  SimResult r;
  r.ber         = p.ber_mean;
  r.q_db        = p.q_mean;
  r.evm_percent = p.evm_mean;
  r.rmps        = p.rmps;
  for (const auto & s : p.per_seed) {
    r.n_bit_errors += s.n_bit_errors;
    r.n_bits += s.n_bits;
  }
  return r;
}

int cmd_design(const CommonOptions & o, long n_taps_flag)
{
  const auto doc = stage("config", [&] { return load_document(o); });
  const auto system = stage("config", [&] { return system_from(doc); });
  const Index nmax  = stage("design", [&] { return max_taps(system); });
  long n_taps       = n_taps_flag > 0 ? n_taps_flag : doc.get_long("n_taps", 0);
  if (n_taps <= 0) { n_taps = static_cast<long>(nmax); }
  const auto taps = stage("design", [&] { return generate_taps(system, n_taps); });

  std::ostringstream csv;
  write_taps_csv(csv, taps);
  OutputWriter out(o, "design", &doc);
  const auto path = out.write("taps.csv", csv.str());
  out.finish();

  std::cout << "N_max = " << nmax << "\n"
            << "n_taps = " << taps.n_taps() << "\n"
            << "|g| = " << format_number(std::abs(taps.taps(0))) << "\n"
            << "energy = " << format_number(taps.taps.squaredNorm()) << "\n"
            << "wrote " << path << "\n";
  return 0;
}

int cmd_cluster(const CommonOptions & o)
{
  const auto doc    = stage("config", [&] { return load_document(o); });
  const auto system = stage("config", [&] { return system_from(doc); });
  const auto engine = stage("config", [&] { return engine_from(doc); });
  const long n_taps = engine.n_taps > 0 ? engine.n_taps : static_cast<long>(max_taps(system));
  const auto taps   = stage("design", [&] { return generate_taps(system, n_taps); });
  const auto plan   = stage("kmeans", [&] { return kmeans(taps.taps, engine.n_clusters, engine.kmeans_seed, engine.kmeans); });
  const auto fuzzy  = stage("fuzzify", [&] { return fuzzify(plan, taps.taps, engine.eta); });

  OutputWriter out(o, "cluster", &doc);
  out.seeds({engine.kmeans_seed});
  const auto path = out.write("fuzzy_plan.json", fuzzy_plan_to_json(fuzzy));
  if (o.svg) { out.write("cluster.svg", svg_scatter(taps.taps, fuzzy)); }
  out.finish();

  std::cout << "n_taps = " << n_taps << "\n"
            << "n_clusters = " << plan.n_clusters() << "\n"
            << "sse = " << format_number(plan.sse) << "\n"
            << "soft = " << fuzzy.n_soft() << "\n"
            << "wrote " << path << "\n";
  return 0;
}

int cmd_complexity(const CommonOptions & o, const std::vector<std::string> & points)
{
  std::vector<std::string> spec = points;
  if (spec.empty()) { spec = {"direct:273", "clustered:26", "fuzzy:12", "fd:512"}; }
  std::vector<ComplexityReport> reports;
  for (const auto & p : spec) {
    const auto colon = p.find(':');
    if (colon == std::string::npos) { throw StageError("config", "--point expects ENGINE:PARAM, got '" + p + "'"); }
    reports.push_back(stage("complexity", [&] {
      return complexity_report(engine_from_string(p.substr(0, colon)), std::stol(p.substr(colon + 1)));
    }));
  }
  std::ostringstream csv;
  write_complexity_csv(csv, reports);
  OutputWriter out(o, "complexity", nullptr);
  const auto path = out.write("complexity.csv", csv.str());
  out.finish();
  std::cout << csv.str() << "wrote " << path << "\n";
  return 0;
}

int cmd_simulate(const CommonOptions & o)
{
  const auto doc    = stage("config", [&] { return load_document(o); });
  const auto link   = stage("config", [&] { return link_from(doc); });
  const auto engine = stage("config", [&] { return engine_from(doc); });
  const auto eq     = stage("equalizer", [&] { return make_equalizer(engine, link.system); });
  const auto result = stage("simulate", [&] { return run_link(link, eq); });

  const long param = engine_param(engine, link.system);
  const bool fuzzy = engine.kind == EngineKind::fuzzy;
  std::ostringstream csv;
  write_results_csv(csv, {make_row(engine.kind, param, fuzzy ? engine.eta : 0.0, fuzzy ? engine.alpha : 1.0, link,
                                   result, std::to_string(link.seed))});
  OutputWriter out(o, "simulate", &doc);
  out.seeds({link.seed});
  const auto path = out.write("simulate.csv", csv.str());
  out.finish();
  std::cout << csv.str() << "wrote " << path << "\n";
  return 0;
}

int cmd_sweep(const CommonOptions & o)
{
  const auto doc = stage("config", [&] { return load_document(o); });
  auto spec      = stage("config", [&] { return sweep_from(doc); });
  spec.jobs      = o.jobs;
  const auto rows = stage("sweep", [&] { return sweep(spec); });

  std::vector<SweepCsvRow> table;
  PlotSeries q{"Q-factor (dB)", {}, {}, false}, c{"RMPS", {}, {}, true};
  for (const auto & r : rows) {
    table.push_back({make_row(spec.family, r.param, r.eta, r.alpha, spec.link, averaged(r.result), seeds_label(spec.seeds)),
                     r.result.q_std, false});
    q.x.push_back(static_cast<double>(r.param));
    q.y.push_back(r.result.q_mean);
    c.x.push_back(static_cast<double>(r.param));
    c.y.push_back(r.result.rmps);
  }
  std::ostringstream csv;
  write_sweep_csv(csv, table);
  OutputWriter out(o, "sweep", &doc);
  out.seeds(spec.seeds);
  const auto path = out.write("sweep.csv", csv.str());
  if (o.svg) {
    out.write("sweep.svg", svg_line_plot("Q-factor and complexity, " + to_string(spec.family) + " engine", "parameter",
                                         "Q (dB)", "RMPS", {q, c}));
  }
  out.finish();
  std::cout << csv.str() << "wrote " << path << "\n";
  return 0;
}

int cmd_optimize(const CommonOptions & o)
{
  const auto doc = stage("config", [&] { return load_document(o); });
  const auto spec = stage("config", [&] { return sweep_from(doc); });
  const auto frames = stage("simulate", [&] { return FrameSet(spec.link, spec.seeds, o.jobs); });
  const auto opt    = stage("optimize", [&] {
    return optimize_alpha_eta(frames, spec.base, spec.base.n_clusters, spec.alpha_grid, spec.eta_grid, o.jobs);
  });

  std::vector<SweepCsvRow> table;
  std::vector<PlotSeries> curves;
  for (const auto & g : opt.grid) {
    const bool is_opt = g.alpha == opt.alpha && g.eta == opt.eta;
    table.push_back({make_row(EngineKind::fuzzy, spec.base.n_clusters, g.eta, g.alpha, spec.link, averaged(g.result),
                              seeds_label(spec.seeds)),
                     g.result.q_std, is_opt});
    if (curves.empty() || curves.back().label != "eta = " + format_number(g.eta)) {
      curves.push_back({"eta = " + format_number(g.eta), {}, {}, false});
    }
    curves.back().x.push_back(g.alpha);
    curves.back().y.push_back(g.result.q_mean);
  }
  std::ostringstream csv;
  write_sweep_csv(csv, table);
  OutputWriter out(o, "optimize", &doc);
  out.seeds(spec.seeds);
  const auto path = out.write("optimize.csv", csv.str());
  if (o.svg) { out.write("optimize.svg", svg_line_plot("Q-factor versus alpha", "alpha", "Q (dB)", "", curves)); }
  out.finish();
  std::cout << "alpha* = " << format_number(opt.alpha) << "\n"
            << "eta* = " << format_number(opt.eta) << "\n"
            << "q_db* = " << format_number(opt.q_db) << "\n"
            << "wrote " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Chromatic dispersion compensation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(DISPERSE_VERSION));

  CommonOptions design_o, cluster_o, complexity_o, simulate_o, sweep_o, optimize_o;
  long n_taps = 0;
  std::vector<std::string> points;

  auto * design = app.add_subcommand("design", "Compute N_max and write the tap set as CSV");
  add_common(design, design_o);
  design->add_option("--n-taps", n_taps, "Tap count (odd, <= N_max; default N_max)");

  auto * cluster = app.add_subcommand("cluster", "K-means + fuzzy soft decision on the taps");
  add_common(cluster, cluster_o);

  auto * complexity = app.add_subcommand("complexity", "RMPS table for engine operating points");
  add_common(complexity, complexity_o, false);
  complexity->add_option("--point", points, "ENGINE:PARAM, e.g. fuzzy:12 or fd:512 (repeatable)");

  auto * simulate = app.add_subcommand("simulate", "Run the simulated link with one engine");
  add_common(simulate, simulate_o);

  auto * sweep_cmd = app.add_subcommand("sweep", "Q-factor and RMPS across a parameter grid");
  add_common(sweep_cmd, sweep_o);

  auto * optimize = app.add_subcommand("optimize", "Grid search of (alpha, eta) for the fuzzy engine");
  add_common(optimize, optimize_o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*design) { return cmd_design(design_o, n_taps); }
    if (*cluster) { return cmd_cluster(cluster_o); }
    if (*complexity) { return cmd_complexity(complexity_o, points); }
    if (*simulate) { return cmd_simulate(simulate_o); }
    if (*sweep_cmd) { return cmd_sweep(sweep_o); }
    if (*optimize) { return cmd_optimize(optimize_o); }
  } catch (const std::exception & e) {
    std::cerr << "disperse: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
