// Independent reference computations used to derive expected test values.
#ifndef PROSTO_TESTS_ORACLES_HPP
#define PROSTO_TESTS_ORACLES_HPP

#include "prosto/environment.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

inline double matern15(double r) { return (1.0 + std::sqrt(3.0) * r) * std::exp(-std::sqrt(3.0) * r); }
inline double matern25(double r) {
  return (1.0 + std::sqrt(5.0) * r + 5.0 * r * r / 3.0) * std::exp(-std::sqrt(5.0) * r);
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Hartmann-3 written term by term.
inline double hartmann3(double x, double y, double z) {
  const double t1 = 1.0 * std::exp(-(3.0 * std::pow(x - 0.3689, 2) + 10.0 * std::pow(y - 0.1170, 2) +
                                     30.0 * std::pow(z - 0.2673, 2)));
  const double t2 = 1.2 * std::exp(-(0.1 * std::pow(x - 0.4699, 2) + 10.0 * std::pow(y - 0.4387, 2) +
                                     35.0 * std::pow(z - 0.7470, 2)));
  const double t3 = 3.0 * std::exp(-(3.0 * std::pow(x - 0.1091, 2) + 10.0 * std::pow(y - 0.8732, 2) +
                                     30.0 * std::pow(z - 0.5547, 2)));
  const double t4 = 3.2 * std::exp(-(0.1 * std::pow(x - 0.0381, 2) + 10.0 * std::pow(y - 0.5743, 2) +
                                     35.0 * std::pow(z - 0.8828, 2)));
  return -(t1 + t2 + t3 + t4);
}

// Value at x1 of every deterministic nonstationary policy, by direct expectation
// over trajectories; returns the best value per initial state.
inline Eigen::VectorXd best_value_by_enumeration(const prosto::DiscretizedMdp& mdp) {
  const int ns = mdp.num_states();
  const int na = mdp.num_actions();
  const int horizon = mdp.horizon();
  const int slots = ns * horizon;
  Eigen::VectorXd best = Eigen::VectorXd::Constant(ns, -1e300);
  std::vector<int> choice(static_cast<std::size_t>(slots), 0);
  while (true) {
    // Forward propagation of the state distribution for each start state.
    for (int x1 = 0; x1 < ns; ++x1) {
      Eigen::VectorXd dist = Eigen::VectorXd::Zero(ns);
      dist(x1) = 1.0;
      double value = 0.0;
      for (int h = 0; h < horizon; ++h) {
        Eigen::VectorXd next = Eigen::VectorXd::Zero(ns);
        for (int s = 0; s < ns; ++s) {
          if (dist(s) == 0.0) continue;
          const int a = choice[static_cast<std::size_t>(h * ns + s)];
          const int z = s * na + a;
          value += dist(s) * mdp.reward_table(z);
          next += dist(s) * mdp.transition[static_cast<std::size_t>(h)].row(z).transpose();
        }
        dist = next;
      }
      best(x1) = std::max(best(x1), value);
    }
    int pos = 0;
    while (pos < slots && ++choice[static_cast<std::size_t>(pos)] == na) choice[static_cast<std::size_t>(pos++)] = 0;
    if (pos == slots) break;
  }
  return best;
}

inline prosto::DiscretizedMdp random_mdp(int ns, int na, int horizon, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  prosto::DiscretizedMdp mdp;
  mdp.geometry.state_grid = Eigen::MatrixXd::Zero(ns, 2);
  for (int s = 0; s < ns; ++s) mdp.geometry.state_grid.row(s) << u(gen), u(gen);
  mdp.geometry.action_grid = Eigen::MatrixXd::Zero(na, 1);
  for (int a = 0; a < na; ++a) mdp.geometry.action_grid(a, 0) = u(gen);
  mdp.geometry.horizon = horizon;
  for (int h = 0; h < horizon; ++h) {
    Eigen::MatrixXd p(ns * na, ns);
    for (int i = 0; i < p.rows(); ++i) {
      for (int j = 0; j < ns; ++j) p(i, j) = u(gen) + 1e-3;
      p.row(i) /= p.row(i).sum();
    }
    mdp.transition.push_back(p);
  }
  mdp.reward_table = Eigen::VectorXd(ns * na);
  for (int i = 0; i < ns * na; ++i) mdp.reward_table(i) = u(gen);
  return mdp;
}

// Ridge regression in an explicit finite feature space built from the Gram's
// eigendecomposition: K = U S U^T, features of anchor i = row i of U S^{1/2}.
// A query with cross-kernel row c has features c U S^{-1/2} (rank-truncated at tol).
struct PrimalRidge {
  Eigen::MatrixXd map;  // n x r, query features = c * map
  Eigen::VectorXd weights;
  Eigen::MatrixXd precision_inv;  // (Phi^T Phi + ridge I)^{-1}
  double ridge;

  PrimalRidge(const Eigen::MatrixXd& k, const Eigen::VectorXd& y, double ridge_, double tol = 1e-12) : ridge(ridge_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    std::vector<int> keep;
    for (int i = 0; i < k.rows(); ++i)
      if (es.eigenvalues()(i) > tol) keep.push_back(i);
    const int r = static_cast<int>(keep.size());
    Eigen::MatrixXd phi(k.rows(), r);
    map.resize(k.rows(), r);
    for (int j = 0; j < r; ++j) {
      const double s = es.eigenvalues()(keep[static_cast<std::size_t>(j)]);
      phi.col(j) = es.eigenvectors().col(keep[static_cast<std::size_t>(j)]) * std::sqrt(s);
      map.col(j) = es.eigenvectors().col(keep[static_cast<std::size_t>(j)]) / std::sqrt(s);
    }
    Eigen::MatrixXd a = phi.transpose() * phi + ridge * Eigen::MatrixXd::Identity(r, r);
    precision_inv = a.inverse();
    weights = precision_inv * phi.transpose() * y;
  }

  double mean(const Eigen::RowVectorXd& cross) const { return (cross * map).dot(weights); }
  // Posterior variance lambda * phi^T (Phi^T Phi + lambda I)^{-1} phi plus the
  // part of k(z,z) outside the feature span.
  double variance(const Eigen::RowVectorXd& cross, double kzz) const {
    const Eigen::RowVectorXd f = cross * map;
    const double in_span = f.squaredNorm();
    return ridge * f * precision_inv * f.transpose() + (kzz - in_span);
  }
};

}  // namespace oracle

#endif  // PROSTO_TESTS_ORACLES_HPP
