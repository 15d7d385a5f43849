#include "prosto/agent.hpp"

#include "prosto/gp_regression.hpp"
#include "prosto/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace prosto {

std::string to_string(ScheduleMode mode) {
  return mode == ScheduleMode::practical ? "practical" : "theory_faithful";
}

std::string to_string(InitStateMode mode) { return mode == InitStateMode::uniform ? "uniform" : "fixed"; }

void ScheduleMultipliers::validate() const {
  for (double c : {c_tau, c_lambda, c_eps, c_beta_t, c_r})
    if (!(c > 0.0 && c <= 1.0)) throw InvalidInput("schedule multipliers must lie in (0,1]");
}

RegularizerSchedule schedule(double num_episodes, int horizon, double beta_p, double kappa,
                             const ScheduleMultipliers& multipliers, ScheduleMode mode) {
  if (!(num_episodes >= 2.0)) throw InvalidInput("schedule: K >= 2 required (log K must be positive)");
  if (horizon < 1) throw InvalidInput("schedule: horizon must be >= 1");
  if (!(beta_p > 1.0) || !std::isfinite(beta_p))
    throw InvalidInput("schedule: needs a finite polynomial eigen-decay exponent beta_p > 1");
  RegularizerSchedule s;
  s.mode = mode;
  s.multipliers = mode == ScheduleMode::theory_faithful ? ScheduleMultipliers::unit() : multipliers;
  s.multipliers.validate();
  const double log_k = std::log(num_episodes);
  const double h2 = static_cast<double>(horizon) * horizon;
  const double base = std::pow(log_k, beta_p) * std::pow(num_episodes, 2.0 / (beta_p + 1.0));
  s.tau = s.multipliers.c_tau * h2 * base;
  s.lambda = s.multipliers.c_lambda * base;
  s.mesh_eps = s.multipliers.c_eps * h2 * kappa * std::pow(num_episodes, -(beta_p - 1.0) / (2.0 * (beta_p + 1.0)));
  return s;
}

StepRegression fit_step_regression(const Eigen::MatrixXd& grid_gram, const std::vector<int>& z_idx,
                                   const std::vector<int>& next_states, double lambda, double beta_t) {
  if (z_idx.size() != next_states.size()) throw InvalidInput("fit_step_regression: anchors and targets differ");
  const Eigen::Index g = grid_gram.rows();
  StepRegression reg;
  reg.next_states = next_states;
  const double scale = beta_t / std::sqrt(lambda);
  if (z_idx.empty()) {
    reg.smoother.resize(g, 0);
    reg.bonus = Eigen::VectorXd::Constant(g, scale);
    return reg;
  }
  const Eigen::MatrixXd anchor_gram = grid_gram(z_idx, z_idx);
  const Eigen::MatrixXd cross = grid_gram(Eigen::all, z_idx);
  const auto model = KrrModel<double>::from_gram(anchor_gram, lambda);
  reg.smoother = model.smoother(cross);
  reg.bonus = scale * model.variance(cross, grid_gram.diagonal()).cwiseSqrt();
  return reg;
}

std::vector<QStage> build_q_stages(const GridGeometry& geometry, const std::vector<StepRegression>& regressions,
                                   const Eigen::VectorXd& reward_grid, const Eigen::VectorXd& noise_grid,
                                   double beta_clip) {
  const int horizon = geometry.horizon;
  const int ns = geometry.num_states();
  const int na = geometry.num_actions();
  const Eigen::Index g = geometry.num_state_actions();
  if (static_cast<int>(regressions.size()) != horizon) throw InvalidInput("build_q_stages: one regression per step");
  if (reward_grid.size() != g || noise_grid.size() != g) throw InvalidInput("build_q_stages: grid size mismatch");

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  std::vector<QStage> stages(static_cast<std::size_t>(horizon));
  Eigen::VectorXd v_next = Eigen::VectorXd::Zero(ns);
  for (int h = horizon - 1; h >= 0; --h) {
    const StepRegression& reg = regressions[static_cast<std::size_t>(h)];
    Eigen::VectorXd q = reward_grid + noise_grid + reg.bonus;
    if (!reg.next_states.empty()) q.noalias() += reg.smoother * v_next(reg.next_states);
    const double radius = beta_clip * (horizon - h);
    q = q.cwiseMax(-radius).cwiseMin(radius);
    QStage& stage = stages[static_cast<std::size_t>(h)];
    stage.step = h;
    stage.clip_radius = radius;
    stage.table = Eigen::Map<const RowMajor>(q.data(), ns, na);
    v_next = stage.table.rowwise().maxCoeff();
  }
  return stages;
}

namespace {

int argmax_lowest(const Eigen::MatrixXd& table, int state) {
  int best = 0;
  for (int a = 1; a < table.cols(); ++a)
    if (table(state, a) > table(state, best)) best = a;
  return best;
}

TrajectoryIndices rollout(const DiscretizedMdp& mdp, const std::vector<QStage>& stages, int x1, Rng& rng) {
  TrajectoryIndices traj;
  int x = x1;
  for (int h = 0; h < mdp.horizon(); ++h) {
    const int a = argmax_lowest(stages[static_cast<std::size_t>(h)].table, x);
    const int z = mdp.geometry.z_index(x, a);
    x = step(mdp, h, z, rng);
    traj.z.push_back(z);
    traj.next_state.push_back(x);
  }
  return traj;
}

}  // namespace

PolicyTable greedy_policy(const std::vector<QStage>& stages) {
  PolicyTable pi;
  pi.actions.reserve(stages.size());
  for (const QStage& stage : stages) {
    std::vector<int> row(static_cast<std::size_t>(stage.table.rows()));
    for (int s = 0; s < stage.table.rows(); ++s) row[static_cast<std::size_t>(s)] = argmax_lowest(stage.table, s);
    pi.actions.push_back(std::move(row));
  }
  return pi;
}

EpisodeOutcome run_episode_pair(const DiscretizedMdp& mdp, const std::vector<QStage>& stages_left,
                                const std::vector<QStage>& stages_right, int x1, Rng& rng_left, Rng& rng_right,
                                Rng& rng_label) {
  if (x1 < 0 || x1 >= mdp.num_states()) throw InvalidInput("run_episode_pair: initial state off the grid");
  if (static_cast<int>(stages_left.size()) != mdp.horizon() || static_cast<int>(stages_right.size()) != mdp.horizon())
    throw InvalidInput("run_episode_pair: stage count differs from horizon");
  EpisodeOutcome out;
  out.left = rollout(mdp, stages_left, x1, rng_left);
  out.right = rollout(mdp, stages_right, x1, rng_right);

  const PointSet grid = mdp.geometry.state_action_grid();
  double sum_left = 0.0;
  double sum_right = 0.0;
  for (int z : out.left.z) sum_left += mdp.reward_table(z);
  for (int z : out.right.z) sum_right += mdp.reward_table(z);
  out.record.pair.left = grid(out.left.z, Eigen::all);
  out.record.pair.right = grid(out.right.z, Eigen::all);
  out.record.true_prob = btl_probability(sum_left, sum_right);
  out.record.label = sample_preference(out.record.true_prob, rng_label);
  return out;
}

ProstoAgent::ProstoAgent(GridGeometry geometry, AgentConfig config)
    : geometry_(std::move(geometry)), config_(std::move(config)) {
  config_.kernel.validate();
  if (config_.kernel.dim != geometry_.dim())
    throw InvalidInput("agent: kernel dimension does not match the state-action grid");
  if (!(config_.delta > 0.0 && config_.delta < 1.0)) throw InvalidInput("agent: delta must lie in (0,1)");
  schedule_ = schedule(config_.num_episodes, geometry_.horizon, eigen_decay_beta(config_.kernel),
                       kappa_z(geometry_.horizon), config_.multipliers, config_.mode);
  grid_gram_ = gram(config_.kernel, geometry_.state_action_grid());
  const Eigen::Index g = grid_gram_.rows();
  cross_.resize(g, 0);
  kbar_.resize(0, 0);
  visit_counts_ = Eigen::VectorXd::Zero(g);
}

std::vector<StepRegression> ProstoAgent::regressions(bool use_left, bool use_right) const {
  const double beta_t = schedule_.multipliers.c_beta_t * std::sqrt(schedule_.lambda);
  std::vector<StepRegression> out;
  out.reserve(static_cast<std::size_t>(geometry_.horizon));
  for (int h = 0; h < geometry_.horizon; ++h) {
    std::vector<int> z;
    std::vector<int> next;
    const auto hs = static_cast<std::size_t>(h);
    for (std::size_t i = 0; i < history_.labels.size(); ++i) {
      if (use_left) {
        z.push_back(history_.left[i].z[hs]);
        next.push_back(history_.left[i].next_state[hs]);
      }
      if (use_right) {
        z.push_back(history_.right[i].z[hs]);
        next.push_back(history_.right[i].next_state[hs]);
      }
    }
    out.push_back(fit_step_regression(grid_gram_, z, next, schedule_.lambda, beta_t));
  }
  return out;
}

EpisodePlan ProstoAgent::plan(std::uint64_t seed, int episode) {
  EpisodePlan out;
  EpisodeDiagnostics& d = out.diagnostics;
  const double tau = schedule_.tau;
  const double lambda = schedule_.lambda;
  const int horizon = geometry_.horizon;

  // Reward estimate, warm-started from the previous episode.
  Eigen::VectorXd labels(history_.episodes());
  for (int i = 0; i < history_.episodes(); ++i) labels(i) = history_.labels[static_cast<std::size_t>(i)];
  KlrrSolution sol = klrr_solve(kbar_, labels, tau, config_.klrr_tol, config_.klrr_max_iters, alpha_);
  alpha_ = std::move(sol.alpha);
  d.klrr_iterations = sol.iterations;
  d.klrr_grad_norm = sol.grad_norm;
  d.klrr_converged = sol.converged;
  const Eigen::VectorXd reward_grid =
      alpha_.size() > 0 ? Eigen::VectorXd(cross_ * alpha_) : Eigen::VectorXd::Zero(grid_gram_.rows());

  // Exploration noise.
  d.beta_r = beta_reward(config_.delta, horizon, tau, kbar_, schedule_.multipliers.c_r);
  d.gamma_traj = log_det_plus_identity(kbar_, tau);
  const Eigen::MatrixXd cov = noise_covariance(grid_gram_, cross_, kbar_, tau, d.beta_r);
  d.noise_var_max = cov.diagonal().maxCoeff();
  const NoiseSampler sampler(cov);
  d.noise_eigen_fallback = sampler.used_eigen_fallback();
  Rng rng_left = make_rng(seed, Substream::noise_left, static_cast<std::uint64_t>(episode));
  Rng rng_right = make_rng(seed, Substream::noise_right, static_cast<std::uint64_t>(episode));
  const Eigen::VectorXd noise_left = sampler.draw(rng_left);
  const Eigen::VectorXd noise_right = sampler.draw(rng_right);

  if (config_.check_invariants) {
    d.noise_domination_margin = noise_domination_margin(grid_gram_, cov, tau, d.beta_r);
    std::vector<int> visited;
    for (Eigen::Index i = 0; i < visit_counts_.size(); ++i)
      if (visit_counts_(i) > 0.0) visited.push_back(static_cast<int>(i));
    d.gain_domination_margin =
        check_gain_domination(kbar_, grid_gram_(visited, visited), visit_counts_(visited), horizon, tau).margin;
  }

  d.beta_t = schedule_.multipliers.c_beta_t * std::sqrt(lambda);
  const double nu = config_.kernel.family == KernelFamily::matern ? config_.kernel.nu
                                                                  : std::numeric_limits<double>::infinity();
  d.beta_clip = beta_clip(config_.delta, d.beta_r, tau, geometry_.dim(), nu, config_.num_episodes);

  // Per-step information gain over the regression anchors (the left policy's when not pooled).
  const int gain_steps = config_.per_step_gains ? horizon : 1;
  for (int h = 0; h < gain_steps; ++h) {
    std::vector<int> z;
    for (std::size_t i = 0; i < history_.labels.size(); ++i) {
      z.push_back(history_.left[i].z[static_cast<std::size_t>(h)]);
      if (config_.pool_transitions) z.push_back(history_.right[i].z[static_cast<std::size_t>(h)]);
    }
    const double gain = log_det_plus_identity(Eigen::MatrixXd(grid_gram_(z, z)), lambda);
    if (h == 0) d.gamma_step1 = gain;
    if (config_.per_step_gains) d.gamma_steps.push_back(gain);
  }

  if (config_.pool_transitions) {
    const auto regs = regressions(true, true);
    out.left = build_q_stages(geometry_, regs, reward_grid, noise_left, d.beta_clip);
    out.right = build_q_stages(geometry_, regs, reward_grid, noise_right, d.beta_clip);
  } else {
    out.left = build_q_stages(geometry_, regressions(true, false), reward_grid, noise_left, d.beta_clip);
    out.right = build_q_stages(geometry_, regressions(false, true), reward_grid, noise_right, d.beta_clip);
  }

  d.max_clip_excess = -std::numeric_limits<double>::infinity();
  for (const auto* stages : {&out.left, &out.right})
    for (const QStage& s : *stages)
      d.max_clip_excess = std::max(d.max_clip_excess, s.table.cwiseAbs().maxCoeff() - s.clip_radius);
  return out;
}

void ProstoAgent::observe(const TrajectoryIndices& left, const TrajectoryIndices& right, int label) {
  const auto horizon = static_cast<std::size_t>(geometry_.horizon);
  if (left.z.size() != horizon || right.z.size() != horizon || left.next_state.size() != horizon ||
      right.next_state.size() != horizon)
    throw InvalidInput("observe: trajectories must have exactly H steps");
  if (label != 0 && label != 1) throw InvalidInput("observe: label must be 0 or 1");
  const Eigen::Index g = grid_gram_.rows();
  Eigen::VectorXd incidence = Eigen::VectorXd::Zero(g);
  for (std::size_t h = 0; h < horizon; ++h) {
    if (left.z[h] < 0 || left.z[h] >= g || right.z[h] < 0 || right.z[h] >= g)
      throw InvalidInput("observe: state-action index off the grid");
    incidence(left.z[h]) += 1.0;
    incidence(right.z[h]) -= 1.0;
    visit_counts_(left.z[h]) += 1.0;
    visit_counts_(right.z[h]) += 1.0;
  }
  history_.left.push_back(left);
  history_.right.push_back(right);
  history_.labels.push_back(label);

  const Eigen::Index t = cross_.cols();
  cross_.conservativeResize(Eigen::NoChange, t + 1);
  cross_.col(t) = grid_gram_ * incidence;
  const Eigen::VectorXd col = cross_.transpose() * incidence;
  kbar_.conservativeResize(t + 1, t + 1);
  kbar_.col(t) = col;
  kbar_.row(t) = col.transpose();
}

RegretTrace run_prosto(const DiscretizedMdp& mdp, const AgentConfig& config, const RunOptions& options) {
  mdp.validate();
  const int episodes = options.episodes < 0 ? config.num_episodes : options.episodes;
  if (options.init_state == InitStateMode::fixed && (options.fixed_state < 0 || options.fixed_state >= mdp.num_states()))
    throw InvalidInput("run_prosto: fixed initial state off the grid");
  const ValueTables optimal = solve_optimal_values(mdp);
  ProstoAgent agent(mdp.geometry, config);
  RegretTrace trace;
  for (int k = 0; k < episodes; ++k) {
    try {
      const auto idx = static_cast<std::uint64_t>(k);
      int x1 = options.fixed_state;
      if (options.init_state == InitStateMode::uniform) {
        Rng init = make_rng(options.seed, Substream::initial_state, idx);
        x1 = std::min(static_cast<int>(uniform01(init) * mdp.num_states()), mdp.num_states() - 1);
      }
      EpisodePlan plan = agent.plan(options.seed, k);
      Rng rng_left = make_rng(options.seed, Substream::transitions, 2 * idx);
      Rng rng_right = make_rng(options.seed, Substream::transitions, 2 * idx + 1);
      Rng rng_label = make_rng(options.seed, Substream::labels, idx);
      const EpisodeOutcome outcome = run_episode_pair(mdp, plan.left, plan.right, x1, rng_left, rng_right, rng_label);

      const double v_left = evaluate_policy(mdp, greedy_policy(plan.left)).values[0](x1);
      const double v_right = evaluate_policy(mdp, greedy_policy(plan.right)).values[0](x1);
      trace.push_regret(optimal.values[0](x1) - 0.5 * (v_left + v_right));

      const EpisodeDiagnostics& d = plan.diagnostics;
      trace.beta_r.push_back(d.beta_r);
      trace.gamma_traj.push_back(d.gamma_traj);
      trace.gamma_step1.push_back(d.gamma_step1);
      trace.noise_var_max.push_back(d.noise_var_max);
      if (!d.gamma_steps.empty()) trace.gamma_steps.push_back(d.gamma_steps);
      trace.noise_domination_margin.push_back(d.noise_domination_margin);
      trace.gain_domination_margin.push_back(d.gain_domination_margin);
      trace.klrr_iterations.push_back(d.klrr_iterations);
      trace.klrr_grad_norm.push_back(d.klrr_grad_norm);
      trace.klrr_converged.push_back(d.klrr_converged);
      trace.max_clip_excess.push_back(d.max_clip_excess);

      agent.observe(outcome.left, outcome.right, outcome.record.label);
    } catch (const std::exception& e) {
      throw RunFailure("episode " + std::to_string(k + 1) + ": " + e.what(), k + 1);
    }
  }
  return trace;
}

}  // namespace prosto
