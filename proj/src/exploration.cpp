#include "prosto/exploration.hpp"

#include "prosto/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace prosto {

Eigen::MatrixXd noise_covariance(const KernelSpec& spec, const std::vector<TrajectoryPair>& pairs,
                                 const PointSet& grid, double tau, double beta_r) {
  return noise_covariance(gram(spec, grid), traj_diff_cross(spec, pairs, grid), traj_diff_gram(spec, pairs), tau,
                          beta_r);
}

Eigen::MatrixXd noise_covariance(const Eigen::MatrixXd& grid_gram, const Eigen::MatrixXd& cross,
                                 const Eigen::MatrixXd& kbar, double tau, double beta_r) {
  if (!(tau > 0.0)) throw InvalidInput("noise_covariance: tau must be positive");
  if (cross.rows() != grid_gram.rows() || cross.cols() != kbar.rows())
    throw InvalidInput("noise_covariance: block shapes disagree");
  const double scale = beta_r * beta_r / tau;
  Eigen::MatrixXd post = grid_gram;
  if (kbar.rows() > 0) {
    Eigen::MatrixXd reg = kbar;
    reg.diagonal().array() += tau;
    const PsdFactor<double> factor = psd_factorize(reg);
    const Eigen::MatrixXd w = factor.lower.triangularView<Eigen::Lower>().solve(cross.transpose());
    post.noalias() -= w.transpose() * w;
  }
  Eigen::MatrixXd cov = scale * post;
  return (cov + cov.transpose()) / 2.0;
}

double noise_domination_margin(const Eigen::MatrixXd& grid_gram, const Eigen::MatrixXd& cov, double tau,
                               double beta_r) {
  const Eigen::MatrixXd diff = (beta_r * beta_r / tau) * grid_gram - cov;
  return min_eigenvalue(diff);
}

NoiseSampler::NoiseSampler(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols()) throw InvalidInput("NoiseSampler: covariance is not square");
  if (cov.isZero(0.0)) {
    factor_ = Eigen::MatrixXd::Zero(cov.rows(), cov.cols());
    return;
  }
  try {
    PsdFactor<double> f = psd_factorize(cov);
    factor_ = std::move(f.lower);
    jitter_ = f.jitter;
  } catch (const NotPsdError&) {
    factor_ = clamped_sqrt_factor(cov, &clamped_mass_);
    eigen_fallback_ = true;
  }
}

Eigen::VectorXd NoiseSampler::draw(Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd xi(factor_.cols());
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = normal(rng);
  return factor_ * xi;
}

NoiseField sample_noise(const Eigen::MatrixXd& cov, const PointSet& grid, Rng& rng) {
  if (cov.rows() != grid.rows()) throw InvalidInput("sample_noise: covariance does not match grid");
  NoiseField field;
  field.grid = grid;
  field.values = NoiseSampler(cov).draw(rng);
  return field;
}

double beta_clip(double delta, double beta_r, double tau, int dim, double nu, double num_episodes) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("beta_clip: delta must lie in (0,1)");
  if (!(tau > 0.0)) throw InvalidInput("beta_clip: tau must be positive");
  if (!(num_episodes >= 1.0)) throw InvalidInput("beta_clip: K must be >= 1");
  const double smooth = std::min(nu, 1.0);
  return 3.0 + 3.0 * beta_r / std::sqrt(tau) *
                   std::sqrt(std::log(2.0 / delta) + 2.0 * dim / smooth * std::log(num_episodes));
}

}  // namespace prosto
