#ifndef PROSTO_EXPERIMENT_HPP
#define PROSTO_EXPERIMENT_HPP

#include "prosto/analysis.hpp"
#include "prosto/config.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace prosto {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kTraceHeader =
    "schema=1,episode,instant_regret,cum_regret,avg_regret,beta_r,gamma_traj,gamma_step1,noise_var_max";

/// A seed's run aborted; carries the seed and the one-based episode.
class ExperimentFailure : public std::runtime_error {
 public:
  ExperimentFailure(std::uint64_t seed, int episode, const std::string& message)
      : std::runtime_error("seed " + std::to_string(seed) + ", " + message), seed_(seed), episode_(episode) {}
  std::uint64_t seed() const noexcept { return seed_; }
  int episode() const noexcept { return episode_; }

 private:
  std::uint64_t seed_;
  int episode_;
};

/// Inclusive fit window [max(1, K / 4), K] of the tail log-log fit.
std::pair<int, int> fit_window(int num_episodes);

struct SeedSummary {
  std::uint64_t seed = 0;
  int episodes = 0;
  double final_cum_regret = 0.0;
  double final_avg_regret = 0.0;
  double final_beta_r = 0.0;
  double final_gamma_traj = 0.0;
  double final_gamma_step1 = 0.0;
  double final_noise_var_max = 0.0;
  std::optional<SlopeFit> fit;  // empty if the window holds a zero cumulative regret
  double theoretical_slope = 0.0;
  bool invariants_checked = true;
  bool gain_domination = true;
  double min_gain_margin = 0.0;
  bool noise_domination = true;
  double min_noise_margin = 0.0;
  bool klrr_converged = true;
};

/// Per-seed verdicts from a finished trace. Domination checks use the
/// tolerance -1e-8 on the recorded margins.
SeedSummary summarize(std::uint64_t seed, const RegretTrace& trace, double theory_slope, bool invariants_checked);

struct SeedRun {
  std::uint64_t seed = 0;
  RegretTrace trace;
  SeedSummary summary;
};

struct ExperimentResult {
  std::vector<SeedRun> runs;  // in config seed order
  double theoretical_slope = 0.0;
  std::vector<std::filesystem::path> files;
};

/// Runs every seed of the config in memory (seed-level threads only).
std::vector<SeedRun> run_seeds(const ExperimentConfig& config, std::ostream* log = nullptr);

/// Runs all seeds and writes trace_seed<S>.csv, summary.csv, manifest.txt and,
/// if enabled, the SVG plots into output.out_dir. On failure every file this
/// call created is removed and ExperimentFailure is thrown.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

std::string format_trace_csv(const RegretTrace& trace);
std::string format_summary_csv(const std::vector<SeedSummary>& summaries);
std::string format_manifest(const ExperimentConfig& config, const std::vector<std::string>& files);
/// Per-step information gains, one column per step.
std::string format_gains_csv(const RegretTrace& trace);

/// Reads back the regret columns of a trace CSV (diagnostic-only columns are
/// restored too). Throws InvalidInput on a schema mismatch.
RegretTrace read_trace_csv(const std::filesystem::path& path);

/// Writes via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

double median(std::vector<double> values);

}  // namespace prosto

#endif  // PROSTO_EXPERIMENT_HPP
