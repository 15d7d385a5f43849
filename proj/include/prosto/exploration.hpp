#ifndef PROSTO_EXPLORATION_HPP
#define PROSTO_EXPLORATION_HPP

#include "prosto/preference.hpp"
#include "prosto/rng.hpp"

#include <vector>

namespace prosto {

/// One exploration-noise sample path realized on the evaluation grid.
struct NoiseField {
  PointSet grid;
  Eigen::VectorXd values;
  double beta_r_used = 0.0;
  double tau_used = 0.0;
};

/// Posterior covariance of the exploration GP on a grid:
///   (beta_r^2 / tau) (K_grid - C (Kbar + tau I)^{-1} C^T),
/// where row g of C holds the pairings of grid point g with each history
/// difference feature.
Eigen::MatrixXd noise_covariance(const KernelSpec& spec, const std::vector<TrajectoryPair>& pairs,
                                 const PointSet& grid, double tau, double beta_r);

/// Same covariance from precomputed blocks (grid Gram, pairings C, Kbar).
Eigen::MatrixXd noise_covariance(const Eigen::MatrixXd& grid_gram, const Eigen::MatrixXd& cross,
                                 const Eigen::MatrixXd& kbar, double tau, double beta_r);

/// min eigenvalue of (beta_r^2 / tau) K_grid - cov; nonnegative when the
/// posterior is dominated by the scaled prior.
double noise_domination_margin(const Eigen::MatrixXd& grid_gram, const Eigen::MatrixXd& cov, double tau,
                               double beta_r);

/// Draws zero-mean Gaussian fields with a fixed covariance. The factor is
/// computed once; if Cholesky fails under every jitter the covariance is
/// eigen-decomposed with negative eigenvalues clamped to zero.
class NoiseSampler {
 public:
  explicit NoiseSampler(const Eigen::MatrixXd& cov);

  Eigen::VectorXd draw(Rng& rng) const;

  Eigen::Index size() const { return factor_.rows(); }
  bool used_eigen_fallback() const { return eigen_fallback_; }
  double clamped_mass() const { return clamped_mass_; }
  double jitter() const { return jitter_; }

 private:
  Eigen::MatrixXd factor_;
  bool eigen_fallback_ = false;
  double clamped_mass_ = 0.0;
  double jitter_ = 0.0;
};

NoiseField sample_noise(const Eigen::MatrixXd& cov, const PointSet& grid, Rng& rng);

/// Clipping radius for the optimistic Q estimate at the last step; step h
/// uses beta_clip * (H - h + 1).
double beta_clip(double delta, double beta_r, double tau, int dim, double nu, double num_episodes);

}  // namespace prosto

#endif  // PROSTO_EXPLORATION_HPP
