#include "oracles.hpp"
#include "prosto/environment.hpp"

#include <doctest.h>

#include <random>

using namespace prosto;

namespace {

DiscretizedMdp single_state_mdp(int horizon, const Eigen::VectorXd& rewards) {
  DiscretizedMdp mdp;
  mdp.geometry.state_grid = Eigen::MatrixXd::Constant(1, 2, 0.5);
  mdp.geometry.action_grid = equispaced_grid(static_cast<int>(rewards.size()), 1);
  mdp.geometry.horizon = horizon;
  mdp.transition.assign(static_cast<std::size_t>(horizon), Eigen::MatrixXd::Ones(rewards.size(), 1));
  mdp.reward_table = rewards;
  return mdp;
}

PolicyTable random_policy(const DiscretizedMdp& mdp, std::mt19937_64& gen) {
  std::uniform_int_distribution<int> pick(0, mdp.num_actions() - 1);
  PolicyTable pi;
  pi.actions.assign(static_cast<std::size_t>(mdp.horizon()), std::vector<int>(static_cast<std::size_t>(mdp.num_states())));
  for (auto& row : pi.actions)
    for (auto& a : row) a = pick(gen);
  return pi;
}

}  // namespace

TEST_SUITE("environment") {
  TEST_CASE("reward_raw examples") {
    CHECK(std::abs(reward_raw(RewardName::ackley3, Point(Eigen::RowVector3d::Zero()))) < 1e-14);
    const double h111 = reward_raw(RewardName::hartmann3, Point(Eigen::RowVector3d(1.0, 1.0, 1.0)));
    CHECK(oracle::hartmann3(1.0, 1.0, 1.0) == doctest::Approx(-0.3004760740554008).epsilon(1e-12));
    CHECK(h111 == doctest::Approx(-0.3004760740554008).epsilon(1e-12));
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      const double x = u(gen), y = u(gen), z = u(gen);
      CHECK(reward_raw(RewardName::hartmann3, Point(Eigen::RowVector3d(x, y, z))) ==
            doctest::Approx(oracle::hartmann3(x, y, z)).epsilon(1e-12));
    }
    // Branin's known minimum 0.397887 at (pi, 2.275) maps to ((pi + 5) / 15, 2.275 / 15); z3 is ignored.
    const double pi = std::acos(-1.0);
    const Point bmin = Eigen::RowVector3d((pi + 5.0) / 15.0, 2.275 / 15.0, 0.3);
    CHECK(reward_raw(RewardName::branin, bmin) == doctest::Approx(0.397887).epsilon(1e-5));
    const Point bmin2 = Eigen::RowVector3d((pi + 5.0) / 15.0, 2.275 / 15.0, 0.9);
    CHECK(reward_raw(RewardName::branin, bmin) == reward_raw(RewardName::branin, bmin2));
    CHECK_THROWS_AS(parse_reward_name("rosenbrock"), InvalidInput);
    CHECK(parse_reward_name("ackley3") == RewardName::ackley3);
    CHECK_THROWS_AS(reward_raw(RewardName::hartmann3, Point(Eigen::RowVector2d(0.1, 0.2))), InvalidInput);
  }

  TEST_CASE("hartmann3 minimum on a fine grid") {
    double best = 1e300;
    Eigen::RowVector3d arg;
    for (int i = 0; i <= 200; ++i)
      for (int j = 0; j <= 200; ++j)
        for (int k = 0; k <= 200; ++k) {
          const double v = oracle::hartmann3(i / 200.0, j / 200.0, k / 200.0);
          if (v < best) {
            best = v;
            arg << i / 200.0, j / 200.0, k / 200.0;
          }
        }
    // Grid spacing 0.005 leaves the grid minimum 6e-4 above the continuous one.
    CHECK(std::abs(best - -3.8628) <= 1e-3);
    CHECK(best == doctest::Approx(-3.862172152313).epsilon(1e-11));
    CHECK(std::abs(arg(0) - 0.1146) <= 0.005);
    CHECK(std::abs(arg(1) - 0.5556) <= 0.005);
    CHECK(std::abs(arg(2) - 0.8525) <= 0.005);
    CHECK(reward_raw(RewardName::hartmann3, Point(arg)) == doctest::Approx(best));
  }

  TEST_CASE("normalize_reward") {
    const PointSet grid = equispaced_grid(5, 3);
    for (RewardName name : {RewardName::hartmann3, RewardName::ackley3, RewardName::branin}) {
      const Eigen::VectorXd table = normalize_reward(name, grid);
      CHECK(table.minCoeff() == 0.0);
      CHECK(table.maxCoeff() == 1.0);
      Eigen::Index lo, hi;
      table.minCoeff(&lo);
      table.maxCoeff(&hi);
      // Minimization benchmarks: the raw minimum becomes the best reward.
      Eigen::VectorXd raw(grid.rows());
      for (Eigen::Index i = 0; i < grid.rows(); ++i) raw(i) = reward_raw(name, grid.row(i));
      CHECK(raw(hi) == raw.minCoeff());
      CHECK(raw(lo) == raw.maxCoeff());
      for (Eigen::Index i = 0; i + 1 < grid.rows(); i += 7)
        CHECK((raw(i) < raw(i + 1)) == (table(i) > table(i + 1)));
    }
    PointSet flat(3, 3);
    flat.setConstant(0.4);
    CHECK(normalize_reward(RewardName::ackley3, flat).isApprox(Eigen::VectorXd::Constant(3, 0.5)));
    CHECK_THROWS_AS(normalize_reward(RewardName::ackley3, PointSet(0, 3)), InvalidInput);
  }

  TEST_CASE("equispaced_grid ordering") {
    const PointSet g = equispaced_grid(3, 2);
    CHECK(g.rows() == 9);
    CHECK(g.row(1).isApprox(Eigen::RowVector2d(0.0, 0.5)));
    CHECK(g.row(3).isApprox(Eigen::RowVector2d(0.5, 0.0)));
    CHECK(equispaced_grid(1, 1)(0, 0) == 0.5);
  }

  TEST_CASE("transition means and rows") {
    CHECK(transition_mean(Eigen::RowVector2d(0.4, 0.8), 0.2).isApprox(Eigen::RowVector2d(0.3, 0.5)));
    CHECK(transition_mean(Eigen::RowVector2d(1.0, 1.0), 1.0).isApprox(Eigen::RowVector2d(1.0, 1.0)));
    const DiscretizedMdp mdp = make_synthetic_mdp(RewardName::hartmann3, 8, 8, 4);
    CHECK(mdp.transition.size() == 4);
    for (const auto& p : mdp.transition) {
      CHECK((p.array() >= 0.0).all());
      CHECK(((p.rowwise().sum().array() - 1.0).abs() <= 1e-12).all());
      CHECK(p == mdp.transition.front());
    }
    CHECK_NOTHROW(mdp.validate());
    // The density is evaluated at grid states and normalized.
    const int z = mdp.geometry.z_index(10, 3);
    const Eigen::RowVector2d mean =
        transition_mean(mdp.geometry.state_grid.row(10), mdp.geometry.action_grid(3, 0));
    Eigen::VectorXd w(64);
    for (int x = 0; x < 64; ++x) w(x) = std::exp(-0.5 * (mdp.geometry.state_grid.row(x) - mean).squaredNorm());
    CHECK(mdp.transition[0].row(z).transpose().isApprox(w / w.sum(), 1e-13));
  }

  TEST_CASE("step") {
    DiscretizedMdp mdp = make_synthetic_mdp(RewardName::ackley3, 4, 2, 2);
    Rng rng = make_rng(0, Substream::transitions, 0);
    std::vector<int> counts(16, 0);
    const int z = mdp.geometry.z_index(5, 1);
    for (int i = 0; i < 100000; ++i) ++counts[static_cast<std::size_t>(step(mdp, 0, z, rng))];
    for (int x = 0; x < 16; ++x) CHECK(std::abs(counts[static_cast<std::size_t>(x)] / 1e5 - mdp.transition[0](z, x)) <= 0.01);

    mdp.transition[1].row(z).setZero();
    mdp.transition[1](z, 7) = 1.0;
    for (int i = 0; i < 100; ++i) CHECK(step(mdp, 1, z, rng) == 7);

    Rng a = make_rng(4, Substream::transitions, 1), b = make_rng(4, Substream::transitions, 1);
    for (int i = 0; i < 50; ++i) CHECK(step(mdp, 0, i % 32, a) == step(mdp, 0, i % 32, b));
  }

  TEST_CASE("dynamic programming") {
    const DiscretizedMdp flat = single_state_mdp(3, Eigen::VectorXd::Constant(1, 0.7));
    CHECK(solve_optimal_values(flat).values[0](0) == doctest::Approx(2.1));

    std::mt19937_64 gen(2);
    const DiscretizedMdp small = oracle::random_mdp(3, 2, 2, gen);
    const Eigen::VectorXd brute = oracle::best_value_by_enumeration(small);
    const ValueTables v = solve_optimal_values(small);
    CHECK((v.values[0] - brute).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(v.values[2].isZero(0.0));

    const ValueTables greedy = evaluate_policy(small, optimal_policy(small));
    for (int h = 0; h <= 2; ++h) CHECK((greedy.values[h] - v.values[h]).cwiseAbs().maxCoeff() <= 1e-12);

    for (int t = 0; t < 20; ++t) {
      const ValueTables pv = evaluate_policy(small, random_policy(small, gen));
      for (int h = 0; h < 2; ++h) CHECK((v.values[h] - pv.values[h]).minCoeff() >= -1e-12);
    }

    // The worst action everywhere still stays below V*.
    PolicyTable worst;
    worst.actions.assign(2, std::vector<int>(3));
    for (int h = 0; h < 2; ++h)
      for (int s = 0; s < 3; ++s)
        worst.actions[h][s] = small.reward_table(2 * s) < small.reward_table(2 * s + 1) ? 0 : 1;
    const ValueTables wv = evaluate_policy(small, worst);
    CHECK((v.values[0] - wv.values[0]).minCoeff() >= -1e-12);

    const DiscretizedMdp two_action = single_state_mdp(4, (Eigen::VectorXd(2) << 0.25, 0.75).finished());
    CHECK(evaluate_policy(two_action, random_policy(two_action, gen)).values[0](0) <= 3.0 + 1e-12);
    PolicyTable low;
    low.actions.assign(4, std::vector<int>(1, 0));
    CHECK(evaluate_policy(two_action, low).values[0](0) == doctest::Approx(1.0));
  }

  TEST_CASE("evaluate_policy rejects incomplete tables") {
    const DiscretizedMdp mdp = make_synthetic_mdp(RewardName::branin, 2, 2, 2);
    PolicyTable pi;
    pi.actions.assign(1, std::vector<int>(4, 0));
    CHECK_THROWS_AS(evaluate_policy(mdp, pi), InvalidInput);
    pi.actions.assign(2, std::vector<int>(3, 0));
    CHECK_THROWS_AS(evaluate_policy(mdp, pi), InvalidInput);
    pi.actions.assign(2, std::vector<int>(4, 2));
    CHECK_THROWS_AS(evaluate_policy(mdp, pi), InvalidInput);
  }

  TEST_CASE("validate rejects broken MDPs") {
    DiscretizedMdp mdp = make_synthetic_mdp(RewardName::hartmann3, 2, 2, 2);
    mdp.transition[0](0, 0) += 1e-6;
    CHECK_THROWS_AS(mdp.validate(), InvalidInput);
    mdp = make_synthetic_mdp(RewardName::hartmann3, 2, 2, 2);
    mdp.transition.pop_back();
    CHECK_THROWS_AS(mdp.validate(), InvalidInput);
  }
}
