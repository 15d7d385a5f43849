#ifndef PROSTO_ENVIRONMENT_HPP
#define PROSTO_ENVIRONMENT_HPP

#include "prosto/common.hpp"
#include "prosto/rng.hpp"

#include <string>
#include <vector>

namespace prosto {

enum class RewardName { hartmann3, ackley3, branin };

RewardName parse_reward_name(const std::string& name);
std::string to_string(RewardName name);

/// Raw benchmark value at a state-action point z in [0,1]^3.
double reward_raw(RewardName name, const Point& z);

/// Affine map of the benchmark onto [0,1] over the grid, oriented so that
/// the benchmark minimum becomes reward 1. A constant function maps to 0.5.
Eigen::VectorXd normalize_reward(RewardName name, const PointSet& grid);

/// Equispaced grid of m points per axis over [0,1]^dim (a single point sits at 0.5).
PointSet equispaced_grid(int points_per_axis, int dim);

/// What a learner is allowed to know about an environment.
struct GridGeometry {
  PointSet state_grid;
  PointSet action_grid;
  int horizon = 1;

  int num_states() const { return static_cast<int>(state_grid.rows()); }
  int num_actions() const { return static_cast<int>(action_grid.rows()); }
  int num_state_actions() const { return num_states() * num_actions(); }
  int z_index(int state, int action) const { return state * num_actions() + action; }
  int dim() const { return static_cast<int>(state_grid.cols() + action_grid.cols()); }

  /// All state-action points, state-major: row z_index(s, a) is (x_s, a_a).
  PointSet state_action_grid() const;
};

/// Finite episodic MDP on a state-action grid. Transitions are stored per
/// step as (num_states * num_actions) x num_states row-stochastic matrices.
struct DiscretizedMdp {
  GridGeometry geometry;
  std::vector<Eigen::MatrixXd> transition;
  Eigen::VectorXd reward_table;
  RewardName reward_name = RewardName::hartmann3;

  int horizon() const { return geometry.horizon; }
  int num_states() const { return geometry.num_states(); }
  int num_actions() const { return geometry.num_actions(); }

  /// Throws InvalidInput when shapes disagree or a transition row is not a
  /// probability vector.
  void validate() const;
};

/// Mean of the spherical-Gaussian transition, [x a] A with
/// A = [[0.5, 0, 0.5], [0, 0.5, 0.5]]^T.
Eigen::RowVector2d transition_mean(const Eigen::RowVector2d& state, double action);

/// Gaussian transition density evaluated at grid states and normalized per
/// row. The same matrix is repeated for every step.
std::vector<Eigen::MatrixXd> build_transition(const PointSet& state_grid, const PointSet& action_grid, int horizon);

/// Synthetic benchmark MDP: m_s x m_s states in [0,1]^2, m_a actions in [0,1].
DiscretizedMdp make_synthetic_mdp(RewardName reward, int m_s, int m_a, int horizon);

/// Next-state index drawn from P_h(. | z). Step h is zero-based.
int step(const DiscretizedMdp& mdp, int h, int z_index, Rng& rng);

/// actions[h][s] is the action index played in state s at zero-based step h.
struct PolicyTable {
  std::vector<std::vector<int>> actions;
};

/// values[h](s) for h = 0..H; values[H] is identically zero.
struct ValueTables {
  std::vector<Eigen::VectorXd> values;
};

ValueTables solve_optimal_values(const DiscretizedMdp& mdp);
PolicyTable optimal_policy(const DiscretizedMdp& mdp);
ValueTables evaluate_policy(const DiscretizedMdp& mdp, const PolicyTable& policy);

}  // namespace prosto

#endif  // PROSTO_ENVIRONMENT_HPP
