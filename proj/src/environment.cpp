#include "prosto/environment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace prosto {

namespace {

double hartmann3(const Point& z) {
  static constexpr std::array<double, 4> alpha{1.0, 1.2, 3.0, 3.2};
  static constexpr double a[4][3] = {{3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}, {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}};
  static constexpr double p[4][3] = {{0.3689, 0.1170, 0.2673},
                                     {0.4699, 0.4387, 0.7470},
                                     {0.1091, 0.8732, 0.5547},
                                     {0.0381, 0.5743, 0.8828}};
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 3; ++j) inner += a[i][j] * (z(j) - p[i][j]) * (z(j) - p[i][j]);
    sum += alpha[i] * std::exp(-inner);
  }
  return -sum;
}

double ackley3(const Point& z) {
  const double two_pi = 2.0 * std::numbers::pi;
  double sq = 0.0;
  double cs = 0.0;
  for (int i = 0; i < 3; ++i) {
    sq += z(i) * z(i);
    cs += std::cos(two_pi * z(i));
  }
  return -20.0 * std::exp(-0.2 * std::sqrt(sq / 3.0)) - std::exp(cs / 3.0) + 20.0 + std::numbers::e;
}

// Standard Branin on [-5,10] x [0,15]; the third coordinate is unused.
double branin(const Point& z) {
  const double pi = std::numbers::pi;
  const double x1 = -5.0 + 15.0 * z(0);
  const double x2 = 15.0 * z(1);
  const double b = 5.1 / (4.0 * pi * pi);
  const double c = 5.0 / pi;
  const double t = 1.0 / (8.0 * pi);
  const double q = x2 - b * x1 * x1 + c * x1 - 6.0;
  return q * q + 10.0 * (1.0 - t) * std::cos(x1) + 10.0;
}

}  // namespace

RewardName parse_reward_name(const std::string& name) {
  if (name == "hartmann3") return RewardName::hartmann3;
  if (name == "ackley3") return RewardName::ackley3;
  if (name == "branin") return RewardName::branin;
  throw InvalidInput("unknown reward function '" + name + "' (expected hartmann3, ackley3 or branin)");
}

std::string to_string(RewardName name) {
  switch (name) {
    case RewardName::hartmann3:
      return "hartmann3";
    case RewardName::ackley3:
      return "ackley3";
    case RewardName::branin:
      return "branin";
  }
  return "unknown";
}

double reward_raw(RewardName name, const Point& z) {
  if (z.size() != 3) throw InvalidInput("reward_raw: expected a 3-dimensional state-action point");
  switch (name) {
    case RewardName::hartmann3:
      return hartmann3(z);
    case RewardName::ackley3:
      return ackley3(z);
    case RewardName::branin:
      return branin(z);
  }
  throw InvalidInput("reward_raw: unknown reward function");
}

Eigen::VectorXd normalize_reward(RewardName name, const PointSet& grid) {
  if (grid.rows() == 0) throw InvalidInput("normalize_reward: empty grid");
  Eigen::VectorXd vals(grid.rows());
  // All three benchmarks are minimization problems.
  for (Eigen::Index i = 0; i < grid.rows(); ++i) vals(i) = -reward_raw(name, grid.row(i));
  const double lo = vals.minCoeff();
  const double hi = vals.maxCoeff();
  if (!(hi > lo)) return Eigen::VectorXd::Constant(grid.rows(), 0.5);
  return (vals.array() - lo) / (hi - lo);
}

PointSet equispaced_grid(int points_per_axis, int dim) {
  if (points_per_axis < 1 || dim < 1) throw InvalidInput("equispaced_grid: sizes must be positive");
  Eigen::VectorXd axis(points_per_axis);
  if (points_per_axis == 1)
    axis(0) = 0.5;
  else
    axis = Eigen::VectorXd::LinSpaced(points_per_axis, 0.0, 1.0);
  Eigen::Index total = 1;
  for (int d = 0; d < dim; ++d) total *= points_per_axis;
  PointSet grid(total, dim);
  for (Eigen::Index i = 0; i < total; ++i) {
    Eigen::Index rest = i;
    // Last coordinate varies fastest.
    for (int d = dim - 1; d >= 0; --d) {
      grid(i, d) = axis(rest % points_per_axis);
      rest /= points_per_axis;
    }
  }
  return grid;
}

PointSet GridGeometry::state_action_grid() const {
  PointSet z(num_state_actions(), dim());
  for (int s = 0; s < num_states(); ++s) {
    for (int a = 0; a < num_actions(); ++a) {
      z.row(z_index(s, a)) << state_grid.row(s), action_grid.row(a);
    }
  }
  return z;
}

void DiscretizedMdp::validate() const {
  const int sa = geometry.num_state_actions();
  if (geometry.horizon < 1) throw InvalidInput("mdp: horizon must be >= 1");
  if (sa == 0) throw InvalidInput("mdp: empty state or action grid");
  if (static_cast<int>(transition.size()) != geometry.horizon)
    throw InvalidInput("mdp: need one transition matrix per step");
  if (reward_table.size() != sa) throw InvalidInput("mdp: reward table size mismatch");
  for (const auto& p : transition) {
    if (p.rows() != sa || p.cols() != num_states()) throw InvalidInput("mdp: transition shape mismatch");
    if ((p.array() < 0.0).any()) throw InvalidInput("mdp: negative transition probability");
    if (((p.rowwise().sum().array() - 1.0).abs() > 1e-12).any())
      throw InvalidInput("mdp: transition row does not sum to one");
  }
}

Eigen::RowVector2d transition_mean(const Eigen::RowVector2d& state, double action) {
  Eigen::Matrix<double, 3, 2> a;
  a << 0.5, 0.0,  //
      0.0, 0.5,   //
      0.5, 0.5;
  const Eigen::RowVector3d xa(state(0), state(1), action);
  return xa * a;
}

std::vector<Eigen::MatrixXd> build_transition(const PointSet& state_grid, const PointSet& action_grid, int horizon) {
  if (state_grid.rows() == 0 || action_grid.rows() == 0) throw InvalidInput("build_transition: empty grid");
  if (state_grid.cols() != 2 || action_grid.cols() != 1)
    throw InvalidInput("build_transition: expected 2-d states and 1-d actions");
  const Eigen::Index ns = state_grid.rows();
  const Eigen::Index na = action_grid.rows();
  Eigen::MatrixXd p(ns * na, ns);
  for (Eigen::Index s = 0; s < ns; ++s) {
    for (Eigen::Index a = 0; a < na; ++a) {
      const Eigen::RowVector2d mean = transition_mean(state_grid.row(s), action_grid(a, 0));
      auto row = p.row(s * na + a);
      for (Eigen::Index x = 0; x < ns; ++x) row(x) = std::exp(-0.5 * (state_grid.row(x) - mean).squaredNorm());
      row /= row.sum();
    }
  }
  return std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(horizon), p);
}

DiscretizedMdp make_synthetic_mdp(RewardName reward, int m_s, int m_a, int horizon) {
  if (horizon < 1) throw InvalidInput("make_synthetic_mdp: horizon must be >= 1");
  DiscretizedMdp mdp;
  mdp.geometry.state_grid = equispaced_grid(m_s, 2);
  mdp.geometry.action_grid = equispaced_grid(m_a, 1);
  mdp.geometry.horizon = horizon;
  mdp.transition = build_transition(mdp.geometry.state_grid, mdp.geometry.action_grid, horizon);
  mdp.reward_table = normalize_reward(reward, mdp.geometry.state_action_grid());
  mdp.reward_name = reward;
  return mdp;
}

int step(const DiscretizedMdp& mdp, int h, int z_index, Rng& rng) {
  const auto& row = mdp.transition.at(static_cast<std::size_t>(h)).row(z_index);
  const double u = uniform01(rng);
  double acc = 0.0;
  for (Eigen::Index x = 0; x < row.size(); ++x) {
    acc += row(x);
    if (u < acc) return static_cast<int>(x);
  }
  // u landed in the round-off gap above the cumulative sum.
  for (Eigen::Index x = row.size() - 1; x >= 0; --x)
    if (row(x) > 0.0) return static_cast<int>(x);
  return static_cast<int>(row.size() - 1);
}

namespace {

Eigen::VectorXd q_values(const DiscretizedMdp& mdp, int h, const Eigen::VectorXd& next_values) {
  return mdp.reward_table + mdp.transition[static_cast<std::size_t>(h)] * next_values;
}

}  // namespace

ValueTables solve_optimal_values(const DiscretizedMdp& mdp) {
  const int horizon = mdp.horizon();
  const int na = mdp.num_actions();
  ValueTables out;
  out.values.assign(static_cast<std::size_t>(horizon + 1), Eigen::VectorXd::Zero(mdp.num_states()));
  for (int h = horizon - 1; h >= 0; --h) {
    const Eigen::VectorXd q = q_values(mdp, h, out.values[static_cast<std::size_t>(h + 1)]);
    auto& v = out.values[static_cast<std::size_t>(h)];
    for (int s = 0; s < mdp.num_states(); ++s) v(s) = q.segment(s * na, na).maxCoeff();
  }
  return out;
}

PolicyTable optimal_policy(const DiscretizedMdp& mdp) {
  const ValueTables v = solve_optimal_values(mdp);
  const int na = mdp.num_actions();
  PolicyTable pi;
  pi.actions.resize(static_cast<std::size_t>(mdp.horizon()));
  for (int h = 0; h < mdp.horizon(); ++h) {
    const Eigen::VectorXd q = q_values(mdp, h, v.values[static_cast<std::size_t>(h + 1)]);
    auto& row = pi.actions[static_cast<std::size_t>(h)];
    row.resize(static_cast<std::size_t>(mdp.num_states()));
    for (int s = 0; s < mdp.num_states(); ++s) {
      Eigen::Index best = 0;
      q.segment(s * na, na).maxCoeff(&best);
      row[static_cast<std::size_t>(s)] = static_cast<int>(best);
    }
  }
  return pi;
}

ValueTables evaluate_policy(const DiscretizedMdp& mdp, const PolicyTable& policy) {
  const int horizon = mdp.horizon();
  if (static_cast<int>(policy.actions.size()) != horizon) throw InvalidInput("evaluate_policy: missing steps");
  for (const auto& row : policy.actions) {
    if (static_cast<int>(row.size()) != mdp.num_states()) throw InvalidInput("evaluate_policy: missing states");
    for (int a : row)
      if (a < 0 || a >= mdp.num_actions()) throw InvalidInput("evaluate_policy: action outside the action grid");
  }
  ValueTables out;
  out.values.assign(static_cast<std::size_t>(horizon + 1), Eigen::VectorXd::Zero(mdp.num_states()));
  for (int h = horizon - 1; h >= 0; --h) {
    const auto& p = mdp.transition[static_cast<std::size_t>(h)];
    const auto& next = out.values[static_cast<std::size_t>(h + 1)];
    auto& v = out.values[static_cast<std::size_t>(h)];
    for (int s = 0; s < mdp.num_states(); ++s) {
      const int z = mdp.geometry.z_index(s, policy.actions[static_cast<std::size_t>(h)][static_cast<std::size_t>(s)]);
      v(s) = mdp.reward_table(z) + p.row(z).dot(next);
    }
  }
  return out;
}

}  // namespace prosto
