#ifndef PROSTO_CONFIG_HPP
#define PROSTO_CONFIG_HPP

#include "prosto/agent.hpp"
#include "prosto/environment.hpp"
#include "prosto/kernel.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace prosto {

/// Configuration problem tied to a dotted key path ("run.K"); the key is
/// empty for file-level problems.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message);
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct ExperimentConfig {
  struct Env {
    RewardName reward_name = RewardName::hartmann3;
    int m_s = 8;
    int m_a = 8;
    int horizon = 4;
    InitStateMode init_state_mode = InitStateMode::uniform;
    int fixed_state = 0;  // grid index used by the fixed mode; 0 is the corner (0, 0)
  };
  struct Run {
    int K = 0;
    std::vector<std::uint64_t> seeds;
    double delta = 0.01;
    bool allow_large_delta = false;
    bool pool_transitions = true;
    bool check_invariants = true;
    int threads = 0;  // 0: one per hardware thread
  };
  struct Schedule {
    ScheduleMode mode = ScheduleMode::practical;
    ScheduleMultipliers multipliers;
  };
  struct Output {
    std::string out_dir = "results";
    bool emit_plots = true;
    bool verbose = false;
  };

  Env env;
  KernelSpec kernel = KernelSpec::matern(2.5, 0.2, 3);
  Run run;
  Schedule schedule;
  Output output;

  /// (key, value) pairs applied after the file, in order; recorded in the manifest.
  std::vector<std::pair<std::string, std::string>> overrides;
};

/// Largest delta accepted without run.allow_large_delta: 0.25 * Phi(-1).
double delta_limit();

/// Parses the key-value grammar:
///   # comment
///   [section]            keys below are prefixed with "section."
///   key = value          value: number, true/false, word, "quoted string", or [a, b, ...]
/// Keys may also be written fully dotted. Unknown and repeated keys are errors.
/// Required: run.K and run.seeds. The result is validated.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");

ExperimentConfig load_config(const std::filesystem::path& path);

/// Sets one dotted key from its textual value (no validation across keys).
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Applies a setting and records it as an override.
void apply_override(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Cross-key validation. Returns warnings (e.g. delta above the limit with the
/// override flag); throws ConfigError on violations.
std::vector<std::string> validate(const ExperimentConfig& config);

/// Every config key with its current value, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& config);

AgentConfig agent_config(const ExperimentConfig& config);
DiscretizedMdp build_mdp(const ExperimentConfig& config);

}  // namespace prosto

#endif  // PROSTO_CONFIG_HPP
