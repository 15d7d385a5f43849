#ifndef PROSTO_PLOTS_HPP
#define PROSTO_PLOTS_HPP

#include "prosto/analysis.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace prosto {

/// Median and one-standard-deviation band across seeds, per episode.
struct RegretBand {
  std::vector<double> median;
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Band over equally long series (one per seed); throws with no series.
RegretBand regret_band(const std::vector<std::vector<double>>& series);

struct LogLogSummary {
  double empirical_slope = 0.0;  // fit of the median log R over the window
  double theoretical_slope = 0.0;
  int k_min = 1;
  int k_max = 1;
  double anchor_log_k = 0.0;   // bound line passes through (anchor_log_k, anchor_log_r)
  double anchor_log_r = 0.0;
  bool bound_above = true;     // bound line >= median log R over the window
};

struct PlotSet {
  std::string cumulative_svg;
  std::string average_svg;
  std::string loglog_svg;
  LogLogSummary loglog;
};

/// Builds the three regret charts. The log-log chart uses the per-seed
/// log R(k) and a line of slope theory_slope anchored at the first fitted point.
PlotSet render_plots(const std::vector<RegretTrace>& traces, double theory_slope, int k_min, int k_max);

/// Writes cumulative_regret.svg, average_regret.svg and loglog_regret.svg.
/// Returns the written paths.
std::vector<std::filesystem::path> emit_plots(const std::vector<RegretTrace>& traces, double theory_slope, int k_min,
                                              int k_max, const std::filesystem::path& out_dir);

/// Reads the trace files and the theoretical slope column of summary.csv.
std::vector<std::filesystem::path> emit_plots(const std::vector<std::filesystem::path>& trace_files,
                                              const std::filesystem::path& summary_file,
                                              const std::filesystem::path& out_dir);

}  // namespace prosto

#endif  // PROSTO_PLOTS_HPP
