#include "prosto/plots.hpp"

#include "prosto/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace prosto {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else if (c == '&')
      out += "&amp;";
    else
      out += c;
  }
  return out;
}

struct Series {
  std::vector<double> x;
  std::vector<double> y;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  Series center;
  Series lower;
  Series upper;
  Series reference;  // optional straight line
  std::string reference_label;
  nlohmann::json metadata;
};

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void widen(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double pad = std::max(1.0, std::abs(lo)) * 0.5;
    lo -= pad;
    hi += pad;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
}

std::string points(const Frame& f, const Series& s) {
  std::string out;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (i) out += ' ';
    out += num(f.px(s.x[i]), 7) + "," + num(f.py(s.y[i]), 7);
  }
  return out;
}

std::string render(const Chart& c) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const Series* s : {&c.center, &c.lower, &c.upper, &c.reference}) {
    for (double x : s->x) x0 = std::min(x0, x), x1 = std::max(x1, x);
    for (double y : s->y) y0 = std::min(y0, y), y1 = std::max(y1, y);
  }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  widen(x0, x1);
  widen(y0, y1);
  const Frame f{x0, x1, y0, y1};

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  os << "<metadata id=\"prosto-metadata\">" << escape(c.metadata.dump()) << "</metadata>\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
     << escape(c.title) << "</text>\n";

  // Axes with five ticks each.
  const double ax_left = kLeft, ax_right = kWidth - kRight, ax_top = kTop, ax_bottom = kHeight - kBottom;
  os << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
  os << "<line x1=\"" << ax_left << "\" y1=\"" << ax_bottom << "\" x2=\"" << ax_right << "\" y2=\"" << ax_bottom
     << "\"/>\n";
  os << "<line x1=\"" << ax_left << "\" y1=\"" << ax_top << "\" x2=\"" << ax_left << "\" y2=\"" << ax_bottom << "\"/>\n";
  os << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\" fill=\"black\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0;
    const double yv = y0 + (y1 - y0) * i / 4.0;
    os << "<line x1=\"" << num(f.px(xv), 7) << "\" y1=\"" << ax_bottom << "\" x2=\"" << num(f.px(xv), 7) << "\" y2=\""
       << ax_bottom + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(f.px(xv), 7) << "\" y=\"" << ax_bottom + 18 << "\" text-anchor=\"middle\">"
       << num(xv, 4) << "</text>\n";
    os << "<line x1=\"" << ax_left - 5 << "\" y1=\"" << num(f.py(yv), 7) << "\" x2=\"" << ax_left << "\" y2=\""
       << num(f.py(yv), 7) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << ax_left - 8 << "\" y=\"" << num(f.py(yv) + 4, 7) << "\" text-anchor=\"end\">" << num(yv, 4)
       << "</text>\n";
  }
  os << "<text x=\"" << (ax_left + ax_right) / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
     << escape(c.x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << (ax_top + ax_bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (ax_top + ax_bottom) / 2 << ")\">" << escape(c.y_label) << "</text>\n";
  os << "</g>\n";

  if (!c.lower.x.empty()) {
    Series band = c.upper;
    for (std::size_t i = c.lower.x.size(); i-- > 0;) {
      band.x.push_back(c.lower.x[i]);
      band.y.push_back(c.lower.y[i]);
    }
    os << "<polygon id=\"band\" points=\"" << points(f, band)
       << "\" fill=\"steelblue\" fill-opacity=\"0.25\" stroke=\"none\"/>\n";
  }
  os << "<polyline id=\"median\" points=\"" << points(f, c.center)
     << "\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\"/>\n";
  if (!c.reference.x.empty()) {
    os << "<polyline id=\"bound\" points=\"" << points(f, c.reference)
       << "\" fill=\"none\" stroke=\"firebrick\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n";
    os << "<text x=\"" << ax_left + 10 << "\" y=\"" << ax_top + 14
       << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"firebrick\">" << escape(c.reference_label)
       << "</text>\n";
  }
  os << "<text x=\"" << ax_left + 10 << "\" y=\"" << ax_top + 28
     << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"steelblue\">median over seeds, band = one std</text>\n";
  os << "</svg>\n";
  return os.str();
}

// Median and population standard deviation.
std::pair<double, double> median_and_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {median(v), std::sqrt(var / static_cast<double>(v.size()))};
}

std::vector<double> episodes_axis(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i + 1);
  return x;
}

Chart band_chart(const std::string& title, const std::string& y_label, const std::vector<std::vector<double>>& series) {
  const RegretBand band = regret_band(series);
  Chart c;
  c.title = title;
  c.x_label = "episode k";
  c.y_label = y_label;
  const auto x = episodes_axis(band.median.size());
  c.center = {x, band.median};
  c.lower = {x, band.lower};
  c.upper = {x, band.upper};
  c.metadata = {{"seeds", series.size()}, {"episodes", band.median.size()}};
  return c;
}

}  // namespace

RegretBand regret_band(const std::vector<std::vector<double>>& series) {
  if (series.empty()) throw InvalidInput("regret_band: at least one seed required");
  const std::size_t n = series.front().size();
  for (const auto& s : series)
    if (s.size() != n) throw InvalidInput("regret_band: traces differ in length");
  RegretBand band;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v;
    for (const auto& s : series) v.push_back(s[i]);
    const auto [m, sd] = median_and_std(v);
    band.median.push_back(m);
    band.lower.push_back(m - sd);
    band.upper.push_back(m + sd);
  }
  return band;
}

PlotSet render_plots(const std::vector<RegretTrace>& traces, double theory_slope, int k_min, int k_max) {
  if (traces.empty()) throw InvalidInput("emit_plots: at least one seed required");
  std::vector<std::vector<double>> cum, avg;
  for (const auto& t : traces) {
    cum.push_back(t.cum_regret);
    avg.push_back(t.avg_regret);
  }
  const std::size_t n = cum.front().size();
  if (k_min < 1 || k_max <= k_min || static_cast<std::size_t>(k_max) > n)
    throw InvalidInput("emit_plots: fit window outside the traces");

  PlotSet out;
  out.cumulative_svg = render(band_chart("Cumulative regret", "R(k)", cum));
  out.average_svg = render(band_chart("Average regret", "R(k) / k", avg));

  // Log-log chart: per-episode median and spread of log R over seeds with R > 0.
  Chart c;
  c.title = "Log cumulative regret";
  c.x_label = "log k";
  c.y_label = "log R(k)";
  std::vector<double> med(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> logs;
    for (const auto& s : cum)
      if (s[i] > 0.0) logs.push_back(std::log(s[i]));
    if (logs.empty()) continue;
    const auto [m, sd] = median_and_std(logs);
    const double lx = std::log(static_cast<double>(i + 1));
    med[i] = m;
    c.center.x.push_back(lx);
    c.center.y.push_back(m);
    c.lower.x.push_back(lx);
    c.lower.y.push_back(m - sd);
    c.upper.x.push_back(lx);
    c.upper.y.push_back(m + sd);
  }

  LogLogSummary& s = out.loglog;
  s.theoretical_slope = theory_slope;
  s.k_min = k_min;
  s.k_max = k_max;
  std::vector<double> window;
  for (int k = k_min; k <= k_max; ++k) window.push_back(med[static_cast<std::size_t>(k - 1)]);
  const bool window_ok = std::all_of(window.begin(), window.end(), [](double v) { return std::isfinite(v); });
  if (window_ok) {
    std::vector<double> fitted(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) fitted[i] = std::exp(window[i]);
    // fit_loglog_slope indexes from episode 1; pad the head with ones.
    std::vector<double> padded(static_cast<std::size_t>(k_min - 1), 1.0);
    padded.insert(padded.end(), fitted.begin(), fitted.end());
    s.empirical_slope = fit_loglog_slope(padded, k_min, k_max).slope;
    s.anchor_log_k = std::log(static_cast<double>(k_min));
    s.anchor_log_r = window.front();
    for (int k = k_min; k <= k_max; ++k) {
      const double lk = std::log(static_cast<double>(k));
      const double bound = s.anchor_log_r + theory_slope * (lk - s.anchor_log_k);
      if (bound < med[static_cast<std::size_t>(k - 1)] - 1e-12) s.bound_above = false;
    }
    const double lk_end = std::log(static_cast<double>(n));
    c.reference = {{s.anchor_log_k, lk_end}, {s.anchor_log_r, s.anchor_log_r + theory_slope * (lk_end - s.anchor_log_k)}};
    c.reference_label = "bound slope " + num(theory_slope, 6) + ", empirical " + num(s.empirical_slope, 6);
  } else {
    s.empirical_slope = std::numeric_limits<double>::quiet_NaN();
    s.bound_above = false;
    c.reference_label = "fit window contains zero regret";
  }
  c.metadata = {{"seeds", traces.size()},
                {"episodes", n},
                {"fit_window", {k_min, k_max}},
                {"theoretical_slope", s.theoretical_slope},
                {"empirical_slope", window_ok ? nlohmann::json(s.empirical_slope) : nlohmann::json(nullptr)},
                {"anchor", {s.anchor_log_k, s.anchor_log_r}},
                {"bound_above_empirical", s.bound_above}};
  out.loglog_svg = render(c);
  return out;
}

std::vector<std::filesystem::path> emit_plots(const std::vector<RegretTrace>& traces, double theory_slope, int k_min,
                                              int k_max, const std::filesystem::path& out_dir) {
  const PlotSet p = render_plots(traces, theory_slope, k_min, k_max);
  std::filesystem::create_directories(out_dir);
  const std::vector<std::pair<std::string, const std::string*>> files = {
      {"cumulative_regret.svg", &p.cumulative_svg},
      {"average_regret.svg", &p.average_svg},
      {"loglog_regret.svg", &p.loglog_svg}};
  std::vector<std::filesystem::path> written;
  for (const auto& [name, body] : files) {
    write_file_atomic(out_dir / name, *body);
    written.push_back(out_dir / name);
  }
  return written;
}

std::vector<std::filesystem::path> emit_plots(const std::vector<std::filesystem::path>& trace_files,
                                              const std::filesystem::path& summary_file,
                                              const std::filesystem::path& out_dir) {
  if (trace_files.empty()) throw InvalidInput("emit_plots: at least one seed required");
  std::vector<RegretTrace> traces;
  for (const auto& f : trace_files) traces.push_back(read_trace_csv(f));
  std::ifstream in(summary_file);
  if (!in) throw InvalidInput("cannot open summary '" + summary_file.string() + "'");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  const auto column = [](const std::string& line, std::size_t idx) {
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t i = 0; i <= idx && std::getline(ss, cell, ','); ++i) {
    }
    return cell;
  };
  std::stringstream hs(header);
  std::string name;
  std::size_t idx = 0;
  bool found = false;
  while (std::getline(hs, name, ',')) {
    if (name == "theoretical_slope") {
      found = true;
      break;
    }
    ++idx;
  }
  if (!found || row.empty()) throw InvalidInput("summary '" + summary_file.string() + "' lacks theoretical_slope");
  const double theory = std::stod(column(row, idx));
  const auto [lo, hi] = fit_window(static_cast<int>(traces.front().size()));
  return emit_plots(traces, theory, lo, hi, out_dir);
}

}  // namespace prosto
