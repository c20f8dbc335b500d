#include "disperse/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace disperse {

namespace {

std::string escape_xml(const std::string & s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string px(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

const char * kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

struct Range
{
  double lo{std::numeric_limits<double>::infinity()};
  double hi{-std::numeric_limits<double>::infinity()};

  void add(double v)
  {
    if (!std::isfinite(v)) { return; }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  void finish()
  {
    if (!(lo <= hi)) {
      lo = 0;
      hi = 1;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

}  // namespace

std::string format_number(double v)
{
  if (std::isnan(v)) { return "nan"; }
  if (std::isinf(v)) { return v > 0 ? "inf" : "-inf"; }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_taps_csv(std::ostream & os, const TapProfile<double> & taps)
{
  os << "k,re,im\n";
  for (Index k = -taps.half_width(); k <= taps.half_width(); ++k) {
    const auto g = taps.at(k);
    os << k << ',' << format_number(g.real()) << ',' << format_number(g.imag()) << '\n';
  }
}

std::string fuzzy_plan_to_json(const FuzzyPlan<double> & plan)
{
  nlohmann::ordered_json doc;
  doc["eta"]       = plan.eta;
  doc["centroids"] = nlohmann::ordered_json::array();
  for (Index k = 0; k < plan.centroids.size(); ++k) {
    doc["centroids"].push_back({plan.centroids(k).real(), plan.centroids(k).imag()});
  }
  doc["entries"] = nlohmann::ordered_json::array();
  for (const auto & e : plan.entries) {
    nlohmann::ordered_json j;
    j["type"]    = e.is_soft() ? "soft" : "hard";
    j["nearest"] = e.nearest;
    if (e.is_soft()) {
      j["second"] = e.second;
      j["v1"]     = e.v1;
    }
    doc["entries"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

FuzzyPlan<double> fuzzy_plan_from_json(const std::string & text)
{
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception & e) {
    throw ParameterError(std::string("invalid fuzzy plan document: ") + e.what());
  }
  try {
    FuzzyPlan<double> plan;
    plan.eta              = doc.at("eta").get<double>();
    const auto & centroids = doc.at("centroids");
    plan.centroids.resize(static_cast<Index>(centroids.size()));
    for (std::size_t k = 0; k < centroids.size(); ++k) {
      plan.centroids(static_cast<Index>(k)) = {centroids[k].at(0).get<double>(), centroids[k].at(1).get<double>()};
    }
    for (const auto & j : doc.at("entries")) {
      FuzzyEntry<double> e;
      const std::string type = j.at("type").get<std::string>();
      e.nearest              = j.at("nearest").get<Index>();
      if (type == "soft") {
        e.kind   = EntryKind::soft;
        e.second = j.at("second").get<Index>();
        e.v1     = j.at("v1").get<double>();
        e.v2     = 1.0 - e.v1;
      } else if (type != "hard") {
        throw ParameterError("unknown entry type '" + type + "'");
      }
      const auto n = plan.centroids.size();
      if (e.nearest < 0 || e.nearest >= n || (e.is_soft() && (e.second < 0 || e.second >= n))) {
        throw ParameterError("fuzzy plan entry references a missing centroid");
      }
      plan.entries.push_back(e);
    }
    return plan;
  } catch (const nlohmann::json::exception & e) {
    throw ParameterError(std::string("malformed fuzzy plan document: ") + e.what());
  }
}

void write_complexity_csv(std::ostream & os, const std::vector<ComplexityReport> & reports)
{
  os << "engine,parameter,rmps,assumptions\n";
  for (const auto & r : reports) {
    std::string joined;
    for (std::size_t i = 0; i < r.assumptions.size(); ++i) { joined += (i ? ";" : "") + r.assumptions[i]; }
    os << to_string(r.engine) << ',' << r.parameter << ',' << format_number(r.rmps) << ',' << joined << '\n';
  }
}

namespace {

void write_result_fields(std::ostream & os, const ResultRow & r)
{
  os << r.engine << ',' << r.param << ',' << r.n_clusters << ',' << format_number(r.eta) << ','
     << format_number(r.alpha) << ',' << format_number(r.snr_db) << ',' << format_number(r.result.ber) << ','
     << format_number(r.result.q_db) << ',' << format_number(r.result.evm_percent) << ','
     << format_number(r.result.rmps) << ',' << r.seed;
}

}  // namespace

void write_results_csv(std::ostream & os, const std::vector<ResultRow> & rows)
{
  os << kResultHeader << '\n';
  for (const auto & r : rows) {
    write_result_fields(os, r);
    os << '\n';
  }
}

void write_sweep_csv(std::ostream & os, const std::vector<SweepCsvRow> & rows)
{
  os << kSweepHeader << '\n';
  for (const auto & r : rows) {
    write_result_fields(os, r.row);
    os << ',' << format_number(r.q_std) << ',' << (r.is_optimum ? 1 : 0) << '\n';
  }
}

std::string svg_scatter(const CVector<double> & taps, const FuzzyPlan<double> & plan)
{
  constexpr double size = 480, margin = 40;
  double extent = 0;
  for (Index i = 0; i < taps.size(); ++i) { extent = std::max({extent, std::abs(taps(i).real()), std::abs(taps(i).imag())}); }
  for (Index k = 0; k < plan.centroids.size(); ++k) {
    extent = std::max({extent, std::abs(plan.centroids(k).real()), std::abs(plan.centroids(k).imag())});
  }
  if (extent <= 0) { extent = 1; }
  extent *= 1.1;
  const double scale = (size / 2 - margin) / extent;
  auto X = [&](double re) { return size / 2 + re * scale; };
  auto Y = [&](double im) { return size / 2 - im * scale; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
     << size << ' ' << size << "\">\n"
     << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "  <line x1=\"" << margin << "\" y1=\"" << size / 2 << "\" x2=\"" << size - margin << "\" y2=\"" << size / 2
     << "\" stroke=\"#999\"/>\n"
     << "  <line x1=\"" << size / 2 << "\" y1=\"" << margin << "\" x2=\"" << size / 2 << "\" y2=\"" << size - margin
     << "\" stroke=\"#999\"/>\n"
     << "  <text x=\"" << size / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">taps: " << taps.size()
     << ", clusters: " << plan.centroids.size() << ", soft: " << plan.n_soft() << ", eta = "
     << escape_xml(format_number(plan.eta)) << "</text>\n"
     << "  <g id=\"taps\">\n";
  for (Index i = 0; i < taps.size(); ++i) {
    const bool soft = i < plan.n_points() && plan.entries[static_cast<std::size_t>(i)].is_soft();
    os << "    <circle cx=\"" << px(X(taps(i).real())) << "\" cy=\"" << px(Y(taps(i).imag())) << "\" r=\"3\" fill=\""
       << (soft ? "#1f77b4" : "#bbbbbb") << "\"/>\n";
  }
  os << "  </g>\n  <g id=\"centroids\">\n";
  for (Index k = 0; k < plan.centroids.size(); ++k) {
    const double cx = X(plan.centroids(k).real()), cy = Y(plan.centroids(k).imag());
    os << "    <path d=\"M " << px(cx - 5) << ' ' << px(cy - 5) << " L " << px(cx + 5) << ' ' << px(cy + 5) << " M "
       << px(cx - 5) << ' ' << px(cy + 5) << " L " << px(cx + 5) << ' ' << px(cy - 5)
       << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
  }
  os << "  </g>\n</svg>\n";
  return os.str();
}

std::string svg_line_plot(
  const std::string & title, const std::string & x_label, const std::string & y_label,
  const std::string & y2_label, const std::vector<PlotSeries> & series)
{
  constexpr double width = 640, height = 420, left = 70, right = 70, top = 40, bottom = 60;
  Range xr, yr, y2r;
  for (const auto & s : series) {
    for (double v : s.x) { xr.add(v); }
    for (double v : s.y) { (s.secondary ? y2r : yr).add(v); }
  }
  xr.finish();
  yr.finish();
  y2r.finish();
  const double pw = width - left - right, ph = height - top - bottom;
  auto X  = [&](double v) { return left + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto Y  = [&](double v, const Range & r) { return top + (1.0 - (v - r.lo) / (r.hi - r.lo)) * ph; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
     << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "  <text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(title)
     << "</text>\n"
     << "  <rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (int t = 0; t <= 4; ++t) {
    const double fx = xr.lo + (xr.hi - xr.lo) * t / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * t / 4.0;
    os << "  <text x=\"" << px(X(fx)) << "\" y=\"" << px(top + ph + 18) << "\" text-anchor=\"middle\" font-size=\"11\">"
       << escape_xml(px(fx)) << "</text>\n"
       << "  <text x=\"" << px(left - 6) << "\" y=\"" << px(Y(fy, yr) + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
       << escape_xml(px(fy)) << "</text>\n";
    if (!y2_label.empty()) {
      const double f2 = y2r.lo + (y2r.hi - y2r.lo) * t / 4.0;
      os << "  <text x=\"" << px(left + pw + 6) << "\" y=\"" << px(Y(f2, y2r) + 4) << "\" font-size=\"11\">"
         << escape_xml(px(f2)) << "</text>\n";
    }
  }
  os << "  <text x=\"" << px(left + pw / 2) << "\" y=\"" << px(height - 16) << "\" text-anchor=\"middle\" font-size=\"13\">"
     << escape_xml(x_label) << "</text>\n"
     << "  <text x=\"16\" y=\"" << px(top + ph / 2) << "\" font-size=\"13\" transform=\"rotate(-90 16 "
     << px(top + ph / 2) << ")\" text-anchor=\"middle\">" << escape_xml(y_label) << "</text>\n";
  if (!y2_label.empty()) {
    os << "  <text x=\"" << px(width - 14) << "\" y=\"" << px(top + ph / 2) << "\" font-size=\"13\" transform=\"rotate(90 "
       << px(width - 14) << ' ' << px(top + ph / 2) << ")\" text-anchor=\"middle\">" << escape_xml(y2_label)
       << "</text>\n";
  }

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto & s      = series[i];
    const Range & r     = s.secondary ? y2r : yr;
    const char * colour = kPalette[i % (sizeof kPalette / sizeof kPalette[0])];
    os << "  <polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\""
       << (s.secondary ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    bool first = true;
    for (std::size_t j = 0; j < std::min(s.x.size(), s.y.size()); ++j) {
      if (!std::isfinite(s.y[j])) { continue; }
      os << (first ? "" : " ") << px(X(s.x[j])) << ',' << px(Y(s.y[j], r));
      first = false;
    }
    os << "\"/>\n"
       << "  <text x=\"" << px(left + 10) << "\" y=\"" << px(top + 16 + 16 * static_cast<double>(i))
       << "\" font-size=\"12\" fill=\"" << colour << "\">" << escape_xml(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string manifest_to_json(const RunManifest & manifest)
{
  nlohmann::ordered_json doc;
  doc["subcommand"] = manifest.subcommand;
  doc["version"]    = manifest.version;
  doc["config"]     = manifest.config;
  doc["seeds"]      = manifest.seeds;
  doc["outputs"]    = manifest.outputs;
  doc["started"]    = manifest.started;
  doc["finished"]   = manifest.finished;
  return doc.dump(2) + "\n";
}

std::string utc_timestamp()
{
  const auto now     = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace disperse
