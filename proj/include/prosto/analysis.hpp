#ifndef PROSTO_ANALYSIS_HPP
#define PROSTO_ANALYSIS_HPP

#include "prosto/preference.hpp"

#include <vector>

namespace prosto {

/// Per-episode regret bookkeeping and diagnostics of one seeded run.
struct RegretTrace {
  std::vector<double> instant_regret;
  std::vector<double> cum_regret;
  std::vector<double> avg_regret;
  std::vector<double> beta_r;
  std::vector<double> gamma_traj;   // log det(I + Kbar / tau)
  std::vector<double> gamma_step1;  // log det(I + K_1 / lambda) over step-1 anchors
  std::vector<double> noise_var_max;
  std::vector<std::vector<double>> gamma_steps;  // per-step gains, filled only when requested

  // Invariant checks recorded every episode.
  std::vector<double> noise_domination_margin;
  std::vector<double> gain_domination_margin;
  std::vector<int> klrr_iterations;
  std::vector<double> klrr_grad_norm;
  std::vector<bool> klrr_converged;
  std::vector<double> max_clip_excess;  // max(|Q| - radius), <= 0 when clipping holds

  std::size_t size() const { return instant_regret.size(); }

  /// Appends one episode; cumulative and average columns are derived.
  void push_regret(double instant);
};

/// Exponent of the regret upper bound, 1 - (b - 1)^2 / (2 b (b + 1)).
/// Tends to 1/2 as b grows; b = +infinity returns 1/2.
double theoretical_slope(double beta_p);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least-squares fit of log R(k) against log k for k in [k_min, k_max]
/// (one-based episode indices, inclusive).
SlopeFit fit_loglog_slope(const std::vector<double>& cum_regret, int k_min, int k_max);
SlopeFit fit_loglog_slope(const RegretTrace& trace, int k_min, int k_max);

struct GainDomination {
  bool holds = true;
  double margin = 0.0;  // rhs - lhs
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Compares log det(I + Kbar / rho) with log det(I + (2H / rho) K_pooled),
/// K_pooled being the Gram over all 2tH constituent points of the pairs.
GainDomination check_gain_domination(const KernelSpec& spec, const std::vector<TrajectoryPair>& pairs, double rho);

/// Same comparison with the pooled points given as distinct points with
/// multiplicities: distinct_gram is their Gram, counts their multiplicities.
GainDomination check_gain_domination(const Eigen::MatrixXd& kbar, const Eigen::MatrixXd& distinct_gram,
                                     const Eigen::VectorXd& counts, int horizon, double rho,
                                     double tolerance = 1e-8);

}  // namespace prosto

#endif  // PROSTO_ANALYSIS_HPP
