#ifndef PROSTO_AGENT_HPP
#define PROSTO_AGENT_HPP

#include "prosto/analysis.hpp"
#include "prosto/environment.hpp"
#include "prosto/exploration.hpp"
#include "prosto/kernel.hpp"
#include "prosto/preference.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace prosto {

enum class ScheduleMode { practical, theory_faithful };

std::string to_string(ScheduleMode mode);

/// Down-scaling factors on the regularizers and confidence widths. In
/// theory-faithful mode all of them are forced to 1.
struct ScheduleMultipliers {
  double c_tau = 0.01;
  double c_lambda = 0.01;
  double c_eps = 1.0;
  double c_beta_t = 1.0;
  double c_r = 0.1;

  static ScheduleMultipliers unit() { return {1.0, 1.0, 1.0, 1.0, 1.0}; }
  void validate() const;
};

struct RegularizerSchedule {
  double tau = 1.0;       // reward (logistic) ridge
  double lambda = 1.0;    // transition (KRR) ridge
  double mesh_eps = 1.0;  // value-cover mesh, reported only
  ScheduleMultipliers multipliers;
  ScheduleMode mode = ScheduleMode::practical;
};

/// tau = H^2 (log K)^b K^{2/(b+1)}, lambda = (log K)^b K^{2/(b+1)},
/// eps = H^2 kappa K^{-(b-1)/(2(b+1))}, each times its multiplier.
/// K is real-valued so that log K = 1 can be requested exactly; K >= 2.
RegularizerSchedule schedule(double num_episodes, int horizon, double beta_p, double kappa,
                             const ScheduleMultipliers& multipliers, ScheduleMode mode);

/// Optimistic Q estimate of one step over the whole state-action grid.
struct QStage {
  int step = 0;             // zero-based h
  Eigen::MatrixXd table;    // num_states x num_actions
  double clip_radius = 0.0; // beta_clip * (H - h)
};

/// One trajectory in grid indices: z[h] = z_index(x_h, a_h), next_state[h] = x_{h+1}.
struct TrajectoryIndices {
  std::vector<int> z;
  std::vector<int> next_state;
};

/// Everything the learner has observed: both trajectories and the label of
/// each past episode. Rewards never enter here.
struct EpisodeHistory {
  std::vector<TrajectoryIndices> left;
  std::vector<TrajectoryIndices> right;
  std::vector<int> labels;

  int episodes() const { return static_cast<int>(labels.size()); }
};

/// Transition-value regression of one step, precomputed on the grid.
struct StepRegression {
  Eigen::MatrixXd smoother;     // grid x anchors: K_{grid,Z} (K_Z + lambda I)^{-1}
  Eigen::VectorXd bonus;        // (beta_t / sqrt(lambda)) sigma(z)
  std::vector<int> next_states; // one per anchor
};

/// KRR of next-state values on anchors z_idx (grid indices) with ridge
/// lambda. An empty anchor set gives a zero smoother and bonus beta_t / sqrt(lambda).
StepRegression fit_step_regression(const Eigen::MatrixXd& grid_gram, const std::vector<int>& z_idx,
                                   const std::vector<int>& next_states, double lambda, double beta_t);

/// Backward recursion over steps H-1..0:
///   Q_h(z) = clip(reward(z) + noise(z) + [S_h V_{h+1}](z) + bonus_h(z), +-beta_clip (H - h)),
/// V_h(x) = max_a Q_h(x, a), V_H = 0. The result is ordered by step.
std::vector<QStage> build_q_stages(const GridGeometry& geometry, const std::vector<StepRegression>& regressions,
                                   const Eigen::VectorXd& reward_grid, const Eigen::VectorXd& noise_grid,
                                   double beta_clip);

/// Per-state argmax over actions, ties broken by the lowest action index.
PolicyTable greedy_policy(const std::vector<QStage>& stages);

struct EpisodeOutcome {
  TrajectoryIndices left;
  TrajectoryIndices right;
  PreferenceRecord record;
};

/// Rolls out both greedy policies from x1 and draws the BTL label from the
/// hidden reward sums.
EpisodeOutcome run_episode_pair(const DiscretizedMdp& mdp, const std::vector<QStage>& stages_left,
                                const std::vector<QStage>& stages_right, int x1, Rng& rng_left, Rng& rng_right,
                                Rng& rng_label);

struct AgentConfig {
  KernelSpec kernel;
  int num_episodes = 200;  // K, used by the schedule and the clipping radius
  double delta = 0.01;
  ScheduleMode mode = ScheduleMode::practical;
  ScheduleMultipliers multipliers;
  bool pool_transitions = true;
  double klrr_tol = 1e-8;
  int klrr_max_iters = 100;
  bool check_invariants = true;
  bool per_step_gains = false;
};

struct EpisodeDiagnostics {
  double beta_r = 0.0;
  double beta_t = 0.0;
  double beta_clip = 0.0;
  double gamma_traj = 0.0;
  double gamma_step1 = 0.0;
  std::vector<double> gamma_steps;  // only with per_step_gains
  double noise_var_max = 0.0;
  double noise_domination_margin = 0.0;
  double gain_domination_margin = 0.0;
  bool noise_eigen_fallback = false;
  int klrr_iterations = 0;
  double klrr_grad_norm = 0.0;
  bool klrr_converged = true;
  double max_clip_excess = 0.0;
};

struct EpisodePlan {
  std::vector<QStage> left;
  std::vector<QStage> right;
  EpisodeDiagnostics diagnostics;
};

/// The learner. It sees the grid geometry, its own trajectories and the
/// preference labels; it never sees rewards or transition probabilities.
class ProstoAgent {
 public:
  ProstoAgent(GridGeometry geometry, AgentConfig config);

  /// Q estimates for both policies of zero-based episode k. Exploration
  /// noise comes from the (seed, noise_left/right, k) substreams.
  EpisodePlan plan(std::uint64_t seed, int episode);

  void observe(const TrajectoryIndices& left, const TrajectoryIndices& right, int label);

  const GridGeometry& geometry() const { return geometry_; }
  const RegularizerSchedule& regularizers() const { return schedule_; }
  const EpisodeHistory& history() const { return history_; }
  const Eigen::MatrixXd& grid_gram() const { return grid_gram_; }
  /// Pairings of every grid point with each history difference feature.
  const Eigen::MatrixXd& history_cross() const { return cross_; }
  const Eigen::MatrixXd& history_gram() const { return kbar_; }
  const Eigen::VectorXd& reward_alpha() const { return alpha_; }

 private:
  std::vector<StepRegression> regressions(bool use_left, bool use_right) const;

  GridGeometry geometry_;
  AgentConfig config_;
  RegularizerSchedule schedule_;
  Eigen::MatrixXd grid_gram_;
  EpisodeHistory history_;
  Eigen::MatrixXd cross_;
  Eigen::MatrixXd kbar_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd visit_counts_;
};

enum class InitStateMode { uniform, fixed };

std::string to_string(InitStateMode mode);

struct RunOptions {
  std::uint64_t seed = 0;
  InitStateMode init_state = InitStateMode::uniform;
  int fixed_state = 0;
  int episodes = -1;  // defaults to config.num_episodes
};

class RunFailure : public std::runtime_error {
 public:
  RunFailure(const std::string& what, int episode) : std::runtime_error(what), episode_(episode) {}
  int episode() const noexcept { return episode_; }

 private:
  int episode_;
};

/// Full PROSTO loop against a simulated environment with exact regret
/// bookkeeping. Throws RunFailure carrying the one-based episode index.
RegretTrace run_prosto(const DiscretizedMdp& mdp, const AgentConfig& config, const RunOptions& options);

}  // namespace prosto

#endif  // PROSTO_AGENT_HPP
