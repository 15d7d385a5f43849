#include "oracles.hpp"
#include "prosto/agent.hpp"
#include "prosto/linalg.hpp"

#include <doctest.h>

#include <random>

using namespace prosto;

namespace {

AgentConfig small_config(int episodes, double nu = 2.5) {
  AgentConfig cfg;
  cfg.kernel = KernelSpec::matern(nu, 0.2, 3);
  cfg.num_episodes = episodes;
  return cfg;
}

std::vector<QStage> random_stages(int horizon, int ns, int na, std::mt19937_64& gen) {
  std::normal_distribution<double> n01;
  std::vector<QStage> stages(static_cast<std::size_t>(horizon));
  for (int h = 0; h < horizon; ++h) {
    stages[h].step = h;
    stages[h].table = Eigen::MatrixXd(ns, na);
    for (int s = 0; s < ns; ++s)
      for (int a = 0; a < na; ++a) stages[h].table(s, a) = n01(gen);
  }
  return stages;
}

}  // namespace

TEST_SUITE("prosto_agent") {
  TEST_CASE("schedule examples") {
    const auto unit = ScheduleMultipliers::unit();
    const double kappa = 3.5;
    const auto s1 = schedule(std::exp(1.0), 1, 2.0, kappa, unit, ScheduleMode::practical);
    CHECK(s1.tau == doctest::Approx(1.9477340410546757).epsilon(1e-12));
    CHECK(s1.lambda == doctest::Approx(1.9477340410546757).epsilon(1e-12));
    CHECK(s1.mesh_eps == doctest::Approx(kappa * std::exp(-1.0 / 6.0)).epsilon(1e-12));

    const auto s2 = schedule(100, 3, 2.0, kappa, unit, ScheduleMode::practical);
    // 9 (ln 100)^2 100^{2/3} and (ln 100)^2 100^{2/3}.
    CHECK(s2.tau == doctest::Approx(4112.133556402497).epsilon(1e-12));
    CHECK(s2.lambda == doctest::Approx(456.90372848916627).epsilon(1e-12));

    const ScheduleMultipliers half{0.5, 0.5, 0.5, 0.5, 0.5};
    const auto s3 = schedule(100, 3, 2.0, kappa, half, ScheduleMode::practical);
    CHECK(s3.tau == doctest::Approx(0.5 * s2.tau));
    CHECK(s3.lambda == doctest::Approx(0.5 * s2.lambda));
    CHECK(s3.mesh_eps == doctest::Approx(0.5 * s2.mesh_eps));

    const auto faithful = schedule(100, 3, 2.0, kappa, half, ScheduleMode::theory_faithful);
    CHECK(faithful.tau == doctest::Approx(s2.tau));
    CHECK(faithful.multipliers.c_r == 1.0);

    CHECK_THROWS_AS(schedule(1, 3, 2.0, kappa, unit, ScheduleMode::practical), InvalidInput);
    CHECK_THROWS_AS(schedule(100, 3, std::numeric_limits<double>::infinity(), kappa, unit, ScheduleMode::practical),
                    InvalidInput);
    const ScheduleMultipliers bad{1.5, 1, 1, 1, 1};
    CHECK_THROWS_AS(schedule(100, 3, 2.0, kappa, bad, ScheduleMode::practical), InvalidInput);
  }

  TEST_CASE("empty history gives the constant bonus") {
    const DiscretizedMdp mdp = make_synthetic_mdp(RewardName::hartmann3, 3, 2, 3);
    const Eigen::MatrixXd kgrid = gram(KernelSpec::matern(2.5, 0.2, 3), mdp.geometry.state_action_grid());
    const double lambda = 2.7, c_beta_t = 0.4;
    std::vector<StepRegression> regs;
    for (int h = 0; h < 3; ++h) regs.push_back(fit_step_regression(kgrid, {}, {}, lambda, c_beta_t * std::sqrt(lambda)));
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(18);
    const auto stages = build_q_stages(mdp.geometry, regs, zero, zero, 3.0);
    for (const auto& s : stages) {
      CHECK((s.table.array() - c_beta_t).abs().maxCoeff() < 1e-15);
      CHECK(s.clip_radius == 3.0 * (3 - s.step));
    }
  }

  TEST_CASE("clipping holds on random histories") {
    std::mt19937_64 gen(3);
    std::uniform_int_distribution<int> pick_z(0, 17), pick_s(0, 8);
    std::normal_distribution<double> n01;
    const DiscretizedMdp mdp = make_synthetic_mdp(RewardName::ackley3, 3, 2, 3);
    const Eigen::MatrixXd kgrid = gram(KernelSpec::matern(1.5, 0.3, 3), mdp.geometry.state_action_grid());
    for (int t = 0; t < 30; ++t) {
      std::vector<StepRegression> regs;
      for (int h = 0; h < 3; ++h) {
        std::vector<int> z, next;
        for (int i = 0; i < 1 + t; ++i) {
          z.push_back(pick_z(gen));
          next.push_back(pick_s(gen));
        }
        regs.push_back(fit_step_regression(kgrid, z, next, 0.05, 2.0));
      }
      Eigen::VectorXd reward(18), noise(18);
      for (int i = 0; i < 18; ++i) {
        reward(i) = 5.0 * n01(gen);
        noise(i) = 5.0 * n01(gen);
      }
      const double clip = 0.5 + 0.1 * t;
      for (const auto& s : build_q_stages(mdp.geometry, regs, reward, noise, clip))
        CHECK(s.table.cwiseAbs().maxCoeff() <= clip * (3 - s.step));
    }
  }

  TEST_CASE("oracle-injected reward recovers the DP values") {
    // 9-state toy: noise and bonus off, the true reward injected, transitions
    // learned by per-step KRR from 200 episodes of uniformly random actions.
    const DiscretizedMdp mdp = make_synthetic_mdp(RewardName::hartmann3, 3, 3, 3);
    const GridGeometry& geo = mdp.geometry;
    const Eigen::MatrixXd kgrid = gram(KernelSpec::matern(2.5, 0.2, 3), geo.state_action_grid());
    std::vector<std::vector<int>> z(3), next(3);
    Rng rng = make_rng(17, Substream::transitions, 0);
    for (int k = 0; k < 200; ++k) {
      int x = static_cast<int>(uniform01(rng) * 9);
      for (int h = 0; h < 3; ++h) {
        const int a = static_cast<int>(uniform01(rng) * 3);
        const int zi = geo.z_index(x, a);
        x = step(mdp, h, zi, rng);
        z[h].push_back(zi);
        next[h].push_back(x);
      }
    }
    std::vector<StepRegression> regs;
    for (int h = 0; h < 3; ++h) regs.push_back(fit_step_regression(kgrid, z[h], next[h], 0.01, 0.0));
    const auto stages = build_q_stages(geo, regs, mdp.reward_table, Eigen::VectorXd::Zero(27), 1e6);
    const ValueTables opt = solve_optimal_values(mdp);
    // About 7 samples per state-action and step: the mean error is the
    // estimation error, single cells fluctuate by several times that.
    double total = 0.0;
    for (int h = 0; h < 3; ++h) {
      const Eigen::VectorXd q_star = mdp.reward_table + mdp.transition[h] * opt.values[h + 1];
      for (int s = 0; s < 9; ++s)
        for (int a = 0; a < 3; ++a) total += std::abs(stages[h].table(s, a) - q_star(geo.z_index(s, a)));
    }
    CHECK(total / 81.0 <= 0.1);
    // The last step has no transition term and is exact.
    for (int s = 0; s < 9; ++s)
      for (int a = 0; a < 3; ++a) CHECK(stages[2].table(s, a) == mdp.reward_table(geo.z_index(s, a)));
  }

  TEST_CASE("greedy_policy tie-breaking and shift invariance") {
    std::vector<QStage> flat(2);
    for (auto& s : flat) s.table = Eigen::MatrixXd::Constant(4, 3, 0.7);
    for (const auto& row : greedy_policy(flat).actions)
      for (int a : row) CHECK(a == 0);

    std::vector<QStage> unique(1);
    unique[0].table = Eigen::MatrixXd::Zero(3, 3);
    unique[0].table(0, 2) = 1.0;
    unique[0].table(1, 1) = 1.0;
    unique[0].table(2, 0) = 1.0;
    CHECK(greedy_policy(unique).actions[0] == std::vector<int>{2, 1, 0});

    std::mt19937_64 gen(4);
    for (int t = 0; t < 50; ++t) {
      auto stages = random_stages(3, 5, 4, gen);
      const auto before = greedy_policy(stages);
      for (auto& s : stages) s.table.array() += 3.25 * (t - 25);
      CHECK(greedy_policy(stages).actions == before.actions);
    }
  }

  TEST_CASE("run_episode_pair") {
    const DiscretizedMdp mdp = make_synthetic_mdp(RewardName::hartmann3, 4, 3, 3);
    std::mt19937_64 gen(5);
    const auto stages = random_stages(3, 16, 3, gen);
    Rng l = make_rng(1, Substream::transitions, 0), r = make_rng(1, Substream::transitions, 0);
    Rng lab = make_rng(1, Substream::labels, 0);
    const EpisodeOutcome same = run_episode_pair(mdp, stages, stages, 6, l, r, lab);
    CHECK(same.left.z == same.right.z);
    CHECK(same.left.next_state == same.right.next_state);
    CHECK(same.record.true_prob == 0.5);
    CHECK(same.left.z.size() == 3);
    CHECK(same.record.pair.left.rows() == 3);

    // Single state: trajectories differ only through actions.
    DiscretizedMdp one;
    one.geometry.state_grid = Eigen::MatrixXd::Constant(1, 2, 0.5);
    one.geometry.action_grid = equispaced_grid(3, 1);
    one.geometry.horizon = 4;
    one.transition.assign(4, Eigen::MatrixXd::Ones(3, 1));
    one.reward_table = (Eigen::VectorXd(3) << 0.1, 0.9, 0.4).finished();
    std::vector<QStage> left(4), right(4);
    for (int h = 0; h < 4; ++h) {
      left[h].table = Eigen::RowVector3d(0.0, 1.0, 0.0);
      right[h].table = Eigen::RowVector3d(0.0, 0.0, h % 2 ? 1.0 : -1.0);
    }
    const EpisodeOutcome out = run_episode_pair(one, left, right, 0, l, r, lab);
    double sl = 0.0, sr = 0.0;
    for (int z : out.left.z) sl += one.reward_table(z);
    for (int z : out.right.z) sr += one.reward_table(z);
    CHECK(sl == doctest::Approx(3.6));
    CHECK(sr == doctest::Approx(0.1 + 0.4 + 0.1 + 0.4));
    CHECK(out.record.true_prob == doctest::Approx(btl_probability(sl, sr)));
    CHECK_THROWS_AS(run_episode_pair(one, left, right, 1, l, r, lab), InvalidInput);
  }

  TEST_CASE("agent incremental blocks match the coordinate-based kernels") {
    const DiscretizedMdp mdp = make_synthetic_mdp(RewardName::branin, 3, 2, 2);
    AgentConfig cfg = small_config(10, 1.5);
    ProstoAgent agent(mdp.geometry, cfg);
    const PointSet grid = mdp.geometry.state_action_grid();
    std::mt19937_64 gen(6);
    std::uniform_int_distribution<int> pz(0, 17), ps(0, 8);
    std::vector<TrajectoryPair> pairs;
    for (int k = 0; k < 6; ++k) {
      TrajectoryIndices l, r;
      for (int h = 0; h < 2; ++h) {
        l.z.push_back(pz(gen));
        r.z.push_back(pz(gen));
        l.next_state.push_back(ps(gen));
        r.next_state.push_back(ps(gen));
      }
      agent.observe(l, r, k % 2);
      pairs.push_back({grid(l.z, Eigen::all), grid(r.z, Eigen::all)});
    }
    CHECK(agent.history().episodes() == 6);
    CHECK((agent.history_gram() - traj_diff_gram(cfg.kernel, pairs)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((agent.history_cross() - traj_diff_cross(cfg.kernel, pairs, grid)).cwiseAbs().maxCoeff() < 1e-12);

    TrajectoryIndices shorter;
    shorter.z = {0};
    shorter.next_state = {0};
    CHECK_THROWS_AS(agent.observe(shorter, shorter, 0), InvalidInput);
    TrajectoryIndices fine;
    fine.z = {0, 1};
    fine.next_state = {0, 1};
    CHECK_THROWS_AS(agent.observe(fine, fine, 2), InvalidInput);
  }

  TEST_CASE("plan diagnostics and invariants") {
    const DiscretizedMdp mdp = make_synthetic_mdp(RewardName::hartmann3, 3, 3, 3);
    ProstoAgent agent(mdp.geometry, small_config(20));
    Rng rng = make_rng(0, Substream::transitions, 0);
    for (int k = 0; k < 8; ++k) {
      const EpisodePlan plan = agent.plan(42, k);
      const auto& d = plan.diagnostics;
      CHECK(d.klrr_converged);
      CHECK(d.noise_domination_margin >= -1e-8);
      CHECK(d.gain_domination_margin >= -1e-8);
      CHECK(d.max_clip_excess <= 0.0);
      CHECK(d.beta_t == doctest::Approx(std::sqrt(agent.regularizers().lambda)));
      for (const auto* stages : {&plan.left, &plan.right})
        for (const auto& s : *stages) CHECK(s.table.cwiseAbs().maxCoeff() <= s.clip_radius);
      Rng r2 = make_rng(0, Substream::transitions, 1000 + k), lab = make_rng(0, Substream::labels, k);
      const EpisodeOutcome out = run_episode_pair(mdp, plan.left, plan.right, k % 9, rng, r2, lab);
      agent.observe(out.left, out.right, out.record.label);
    }
    // Determinism of the plan given (seed, history).
    const EpisodePlan a = agent.plan(42, 8), b = agent.plan(42, 8);
    for (int h = 0; h < 3; ++h) CHECK(a.left[h].table == b.left[h].table);
    CHECK(a.left[0].table != a.right[0].table);
  }

  TEST_CASE("run_prosto single episode and regret bounds") {
    const DiscretizedMdp mdp = make_synthetic_mdp(RewardName::hartmann3, 3, 3, 3);
    RunOptions one;
    one.episodes = 1;
    const RegretTrace t1 = run_prosto(mdp, small_config(2), one);
    CHECK(t1.size() == 1);
    CHECK(t1.cum_regret[0] == t1.instant_regret[0]);

    const ValueTables opt = solve_optimal_values(mdp);
    RunOptions opts;
    opts.seed = 3;
    const RegretTrace t = run_prosto(mdp, small_config(25), opts);
    CHECK(t.size() == 25);
    for (std::size_t k = 0; k < t.size(); ++k) {
      CHECK(t.instant_regret[k] >= -1e-9);
      CHECK(t.instant_regret[k] <= opt.values[0].maxCoeff() + 1e-12);
      CHECK(t.avg_regret[k] == doctest::Approx(t.cum_regret[k] / (k + 1.0)));
      if (k > 0) CHECK(t.cum_regret[k] >= t.cum_regret[k - 1] - 1e-9);
      CHECK(t.klrr_converged[k]);
    }
    const RegretTrace again = run_prosto(mdp, small_config(25), opts);
    CHECK(again.instant_regret == t.instant_regret);
    CHECK(again.beta_r == t.beta_r);

    RunOptions fixed = opts;
    fixed.init_state = InitStateMode::fixed;
    fixed.fixed_state = 0;
    fixed.episodes = 5;
    for (double r : run_prosto(mdp, small_config(25), fixed).instant_regret)
      CHECK(r <= opt.values[0](0) + 1e-12);
    fixed.fixed_state = 9;
    CHECK_THROWS_AS(run_prosto(mdp, small_config(25), fixed), InvalidInput);
  }

  TEST_CASE("run_prosto failures carry the episode index") {
    const DiscretizedMdp mdp = make_synthetic_mdp(RewardName::hartmann3, 3, 3, 3);
    AgentConfig cfg = small_config(10);
    cfg.klrr_max_iters = 0;  // never converges, but that is only flagged
    RunOptions opts;
    opts.episodes = 3;
    const RegretTrace t = run_prosto(mdp, cfg, opts);
    CHECK_FALSE(t.klrr_converged[2]);

    DiscretizedMdp broken = mdp;
    broken.reward_table(0) = std::numeric_limits<double>::quiet_NaN();
    try {
      run_prosto(broken, small_config(10), opts);
      // A NaN reward only surfaces once it reaches a label.
    } catch (const RunFailure& e) {
      CHECK(e.episode() >= 1);
      CHECK(std::string(e.what()).rfind("episode ", 0) == 0);
    }
  }

  TEST_CASE("learner never reads the reward table") {
    // Two environments sharing transitions but with different hidden rewards
    // produce the same learner trajectory as long as the labels coincide.
    // Replaying recorded labels against a reward-free copy reproduces every plan.
    const DiscretizedMdp mdp = make_synthetic_mdp(RewardName::ackley3, 3, 3, 2);
    const AgentConfig cfg = small_config(12);
    ProstoAgent live(mdp.geometry, cfg);
    GridGeometry blind_geometry = mdp.geometry;
    ProstoAgent replay(blind_geometry, cfg);
    for (int k = 0; k < 6; ++k) {
      const EpisodePlan p1 = live.plan(5, k);
      const EpisodePlan p2 = replay.plan(5, k);
      for (int h = 0; h < 2; ++h) CHECK(p1.left[h].table == p2.left[h].table);
      Rng l = make_rng(5, Substream::transitions, 2 * k), r = make_rng(5, Substream::transitions, 2 * k + 1);
      Rng lab = make_rng(5, Substream::labels, k);
      const EpisodeOutcome out = run_episode_pair(mdp, p1.left, p1.right, k % 9, l, r, lab);
      live.observe(out.left, out.right, out.record.label);
      replay.observe(out.left, out.right, out.record.label);
    }
  }
}
