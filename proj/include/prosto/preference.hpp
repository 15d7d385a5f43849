#ifndef PROSTO_PREFERENCE_HPP
#define PROSTO_PREFERENCE_HPP

#include "prosto/kernel.hpp"
#include "prosto/rng.hpp"

#include <vector>

namespace prosto {

/// Two trajectories of equal horizon; row h of each matrix is the
/// state-action point z_h. Label 1 means "left preferred".
struct TrajectoryPair {
  PointSet left;
  PointSet right;

  Eigen::Index horizon() const { return left.rows(); }
};

struct PreferenceRecord {
  TrajectoryPair pair;
  int label = 0;
  // Ground-truth BTL probability, kept for diagnostics. Learners never read it.
  double true_prob = 0.5;
};

/// Kernel logistic ridge regression estimate theta = sum_i alpha_i phibar_i.
struct DualRewardEstimate {
  std::vector<TrajectoryPair> anchor_pairs;
  Eigen::VectorXd alpha;
  double ridge = 1.0;
  int newton_iters = 0;
  double final_grad_norm = 0.0;
  bool converged = true;
};

double sigmoid(double x);

/// sigma(sum_left - sum_right).
double btl_probability(double sum_left, double sum_right);

/// Bernoulli(p) draw; p must lie in the open interval (0, 1).
int sample_preference(double p, Rng& rng);

/// Maximum inverse link gradient of the logistic on [-H, H].
double kappa_z(int horizon);

double traj_diff_inner(const KernelSpec& spec, const TrajectoryPair& a, const TrajectoryPair& b);

/// Gram of trajectory-difference features. PSD, diagonal not normalized.
Eigen::MatrixXd traj_diff_gram(const KernelSpec& spec, const std::vector<TrajectoryPair>& pairs);

/// Pairings <phi(z), phibar_i> for one query point.
Eigen::VectorXd traj_diff_cross(const KernelSpec& spec, const std::vector<TrajectoryPair>& pairs, const Point& z);

/// Pairings for many query points: entry (q, i) is <phi(z_q), phibar_i>.
Eigen::MatrixXd traj_diff_cross(const KernelSpec& spec, const std::vector<TrajectoryPair>& pairs,
                                const PointSet& queries);

// ---------------------------------------------------------------------------
// Dual Newton solver for the penalized logistic likelihood.

struct KlrrSolution {
  Eigen::VectorXd alpha;
  int iterations = 0;
  double grad_norm = 0.0;
  double objective = 0.0;
  bool converged = false;
};

/// L(alpha) = sum_i [log(1 + e^{s_i}) - y_i s_i] + tau alpha^T Kbar alpha, s = Kbar alpha.
double klrr_objective(const Eigen::MatrixXd& kbar, const Eigen::VectorXd& labels, double tau,
                      const Eigen::VectorXd& alpha);

/// Damped Newton on L. warm_start may be shorter than the label vector; it
/// is zero-padded. Stops when the infinity norm of the gradient is <= tol.
KlrrSolution klrr_solve(const Eigen::MatrixXd& kbar, const Eigen::VectorXd& labels, double tau, double tol = 1e-8,
                        int max_iters = 100, const Eigen::VectorXd& warm_start = Eigen::VectorXd());

DualRewardEstimate klrr_fit(const KernelSpec& spec, const std::vector<PreferenceRecord>& records, double tau,
                            double tol = 1e-8, int max_iters = 100);

double reward_eval(const DualRewardEstimate& est, const KernelSpec& spec, const Point& z);

/// Confidence width of the reward estimate in the W-norm, scaled by c_r.
double beta_reward(double delta, int horizon, double tau, const Eigen::MatrixXd& kbar, double c_r = 1.0);

}  // namespace prosto

#endif  // PROSTO_PREFERENCE_HPP
