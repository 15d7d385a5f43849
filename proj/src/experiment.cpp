#include "prosto/experiment.hpp"

#include "prosto/plots.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace prosto {

namespace {

constexpr double kMarginTolerance = -1e-8;

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string trace_name(std::uint64_t seed) { return "trace_seed" + std::to_string(seed) + ".csv"; }
std::string gains_name(std::uint64_t seed) { return "gains_seed" + std::to_string(seed) + ".csv"; }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw InvalidInput("malformed number '" + s + "'");
  return v;
}

double min_or_zero(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end()); }

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidInput("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::pair<int, int> fit_window(int num_episodes) {
  if (num_episodes < 2) throw InvalidInput("fit_window: need at least two episodes");
  return {std::max(1, num_episodes / 4), num_episodes};
}

SeedSummary summarize(std::uint64_t seed, const RegretTrace& trace, double theory_slope, bool invariants_checked) {
  if (trace.size() == 0) throw InvalidInput("summarize: empty trace");
  SeedSummary s;
  s.seed = seed;
  s.episodes = static_cast<int>(trace.size());
  s.final_cum_regret = trace.cum_regret.back();
  s.final_avg_regret = trace.avg_regret.back();
  s.final_beta_r = trace.beta_r.back();
  s.final_gamma_traj = trace.gamma_traj.back();
  s.final_gamma_step1 = trace.gamma_step1.back();
  s.final_noise_var_max = trace.noise_var_max.back();
  s.theoretical_slope = theory_slope;
  if (s.episodes >= 2) {
    const auto [lo, hi] = fit_window(s.episodes);
    try {
      s.fit = fit_loglog_slope(trace, lo, hi);
    } catch (const InvalidInput&) {
      s.fit.reset();
    }
  }
  s.invariants_checked = invariants_checked;
  s.min_gain_margin = min_or_zero(trace.gain_domination_margin);
  s.min_noise_margin = min_or_zero(trace.noise_domination_margin);
  s.gain_domination = s.min_gain_margin >= kMarginTolerance;
  s.noise_domination = s.min_noise_margin >= kMarginTolerance;
  s.klrr_converged = std::all_of(trace.klrr_converged.begin(), trace.klrr_converged.end(), [](bool b) { return b; });
  return s;
}

std::string format_trace_csv(const RegretTrace& t) {
  std::string out = std::string(kTraceHeader) + "\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    out += "1," + std::to_string(i + 1) + "," + fmt9(t.instant_regret[i]) + "," + fmt9(t.cum_regret[i]) + "," +
           fmt9(t.avg_regret[i]) + "," + fmt9(t.beta_r[i]) + "," + fmt9(t.gamma_traj[i]) + "," +
           fmt9(t.gamma_step1[i]) + "," + fmt9(t.noise_var_max[i]) + "\n";
  }
  return out;
}

std::string format_gains_csv(const RegretTrace& t) {
  std::string out = "episode";
  const std::size_t steps = t.gamma_steps.empty() ? 0 : t.gamma_steps.front().size();
  for (std::size_t h = 0; h < steps; ++h) out += ",gamma_step" + std::to_string(h + 1);
  out += "\n";
  for (std::size_t i = 0; i < t.gamma_steps.size(); ++i) {
    out += std::to_string(i + 1);
    for (double g : t.gamma_steps[i]) out += "," + fmt9(g);
    out += "\n";
  }
  return out;
}

std::string format_summary_csv(const std::vector<SeedSummary>& rows) {
  std::string out =
      "seed,episodes,final_cum_regret,final_avg_regret,final_beta_r,final_gamma_traj,final_gamma_step1,"
      "final_noise_var_max,fitted_slope,fit_intercept,theoretical_slope,slope_within_bound,gain_domination,"
      "min_gain_margin,noise_domination,min_noise_margin,klrr_converged\n";
  const auto verdict = [](bool checked, bool v) { return std::string(!checked ? "unchecked" : v ? "true" : "false"); };
  for (const auto& s : rows) {
    const bool within = s.fit && s.fit->slope <= s.theoretical_slope;
    out += std::to_string(s.seed) + "," + std::to_string(s.episodes) + "," + fmt9(s.final_cum_regret) + "," +
           fmt9(s.final_avg_regret) + "," + fmt9(s.final_beta_r) + "," + fmt9(s.final_gamma_traj) + "," +
           fmt9(s.final_gamma_step1) + "," + fmt9(s.final_noise_var_max) + "," +
           (s.fit ? fmt9(s.fit->slope) : "nan") + "," + (s.fit ? fmt9(s.fit->intercept) : "nan") + "," +
           fmt9(s.theoretical_slope) + "," + (within ? "true" : "false") + "," +
           verdict(s.invariants_checked, s.gain_domination) + "," + fmt9(s.min_gain_margin) + "," +
           verdict(s.invariants_checked, s.noise_domination) + "," + fmt9(s.min_noise_margin) + "," +
           (s.klrr_converged ? "true" : "false") + "\n";
  }
  return out;
}

std::string format_manifest(const ExperimentConfig& config, const std::vector<std::string>& files) {
  std::ostringstream os;
  os << "# prosto run manifest\n";
  os << "version = " << kVersion << "\n";
  os << "trace_schema = 1\n";
  std::string seeds;
  for (std::size_t i = 0; i < config.run.seeds.size(); ++i) seeds += (i ? "," : "") + std::to_string(config.run.seeds[i]);
  os << "seeds = " << seeds << "\n";
  const double beta_p = eigen_decay_beta(config.kernel);
  const auto [lo, hi] = fit_window(config.run.K);
  const RegularizerSchedule sched = schedule(config.run.K, config.env.horizon, beta_p, kappa_z(config.env.horizon),
                                             config.schedule.multipliers, config.schedule.mode);
  os << "beta_p = " << fmt9(beta_p) << "\n";
  os << "theoretical_slope = " << fmt9(theoretical_slope(beta_p)) << "\n";
  os << "fit_window = " << lo << ".." << hi << "\n";
  os << "tau = " << fmt9(sched.tau) << "\n";
  os << "lambda = " << fmt9(sched.lambda) << "\n";
  os << "mesh_eps = " << fmt9(sched.mesh_eps) << "\n";
  os << "\n[config]\n";
  for (const auto& [key, value] : config_entries(config)) os << key << " = " << value << "\n";
  os << "\n[overrides]\n";
  for (const auto& [key, value] : config.overrides) os << key << " = " << value << "\n";
  os << "\n[files]\n";
  for (const auto& f : files) os << f << "\n";
  return os.str();
}

RegretTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open trace file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw InvalidInput("trace file '" + path.string() + "' has an unexpected header");
  RegretTrace t;
  int expected = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 9 || cells[0] != "1")
      throw InvalidInput("trace file '" + path.string() + "': malformed row " + std::to_string(expected));
    if (std::stoi(cells[1]) != expected) throw InvalidInput("trace file '" + path.string() + "': episodes out of order");
    t.instant_regret.push_back(to_double(cells[2]));
    t.cum_regret.push_back(to_double(cells[3]));
    t.avg_regret.push_back(to_double(cells[4]));
    t.beta_r.push_back(to_double(cells[5]));
    t.gamma_traj.push_back(to_double(cells[6]));
    t.gamma_step1.push_back(to_double(cells[7]));
    t.noise_var_max.push_back(to_double(cells[8]));
    ++expected;
  }
  return t;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
      out << contents;
      out.flush();
      if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
}

std::vector<SeedRun> run_seeds(const ExperimentConfig& config, std::ostream* log) {
  validate(config);
  const DiscretizedMdp mdp = build_mdp(config);
  const AgentConfig agent = agent_config(config);
  const double theory = theoretical_slope(eigen_decay_beta(config.kernel));
  const std::size_t n = config.run.seeds.size();
  std::vector<SeedRun> runs(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex log_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < n && !failed; i = next++) {
      const std::uint64_t seed = config.run.seeds[i];
      try {
        RunOptions opts;
        opts.seed = seed;
        opts.init_state = config.env.init_state_mode;
        opts.fixed_state = config.env.fixed_state;
        runs[i].seed = seed;
        runs[i].trace = run_prosto(mdp, agent, opts);
        runs[i].summary = summarize(seed, runs[i].trace, theory, config.run.check_invariants);
        if (log) {
          std::lock_guard lock(log_mutex);
          *log << "seed " << seed << ": " << runs[i].trace.size() << " episodes, avg regret "
               << fmt9(runs[i].summary.final_avg_regret) << "\n";
        }
      } catch (const RunFailure& e) {
        errors[i] = std::make_exception_ptr(ExperimentFailure(seed, e.episode(), e.what()));
        failed = true;
      } catch (const std::exception& e) {
        errors[i] = std::make_exception_ptr(ExperimentFailure(seed, 0, e.what()));
        failed = true;
      }
    }
  };

  std::size_t threads = config.run.threads > 0 ? static_cast<std::size_t>(config.run.threads)
                                               : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return runs;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log) {
  for (const auto& w : validate(config))
    if (log) *log << "warning: " << w << "\n";
  const std::filesystem::path dir = config.output.out_dir;
  const bool dir_existed = std::filesystem::exists(dir);
  std::filesystem::create_directories(dir);

  ExperimentResult result;
  result.theoretical_slope = theoretical_slope(eigen_decay_beta(config.kernel));
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& f : result.files) std::filesystem::remove(f, ec);
    if (!dir_existed && std::filesystem::is_empty(dir, ec)) std::filesystem::remove(dir, ec);
  };

  try {
    result.runs = run_seeds(config, config.output.verbose ? log : nullptr);
    std::vector<std::string> names;
    std::vector<SeedSummary> summaries;
    for (const auto& run : result.runs) {
      const auto path = dir / trace_name(run.seed);
      write_file_atomic(path, format_trace_csv(run.trace));
      result.files.push_back(path);
      names.push_back(path.filename().string());
      if (config.output.verbose && !run.trace.gamma_steps.empty()) {
        const auto gains = dir / gains_name(run.seed);
        write_file_atomic(gains, format_gains_csv(run.trace));
        result.files.push_back(gains);
        names.push_back(gains.filename().string());
      }
      summaries.push_back(run.summary);
    }
    const auto summary_path = dir / "summary.csv";
    write_file_atomic(summary_path, format_summary_csv(summaries));
    result.files.push_back(summary_path);
    names.push_back("summary.csv");
    if (config.output.emit_plots) {
      std::vector<RegretTrace> traces;
      for (const auto& run : result.runs) traces.push_back(run.trace);
      const auto [lo, hi] = fit_window(config.run.K);
      for (const auto& p : emit_plots(traces, result.theoretical_slope, lo, hi, dir)) {
        result.files.push_back(p);
        names.push_back(p.filename().string());
      }
    }
    const auto manifest = dir / "manifest.txt";
    write_file_atomic(manifest, format_manifest(config, names));
    result.files.push_back(manifest);
  } catch (const ExperimentFailure&) {
    cleanup();
    throw;
  } catch (const std::exception& e) {
    cleanup();
    throw std::runtime_error(std::string("writing outputs: ") + e.what());
  }
  return result;
}

}  // namespace prosto
