#include "prosto/analysis.hpp"

#include "prosto/linalg.hpp"

#include <cmath>
#include <map>
#include <vector>

namespace prosto {

void RegretTrace::push_regret(double instant) {
  const double prev = cum_regret.empty() ? 0.0 : cum_regret.back();
  instant_regret.push_back(instant);
  cum_regret.push_back(prev + instant);
  avg_regret.push_back(cum_regret.back() / static_cast<double>(cum_regret.size()));
}

double theoretical_slope(double beta_p) {
  if (!(beta_p > 1.0)) throw InvalidInput("theoretical_slope: beta_p must exceed 1");
  if (std::isinf(beta_p)) return 0.5;
  return 1.0 - (beta_p - 1.0) * (beta_p - 1.0) / (2.0 * beta_p * (beta_p + 1.0));
}

SlopeFit fit_loglog_slope(const std::vector<double>& cum_regret, int k_min, int k_max) {
  if (k_min < 1 || k_max <= k_min) throw InvalidInput("fit_loglog_slope: need 1 <= k_min < k_max");
  if (static_cast<std::size_t>(k_max) > cum_regret.size()) throw InvalidInput("fit_loglog_slope: k_max beyond trace");
  const int n = k_max - k_min + 1;
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (int k = k_min; k <= k_max; ++k) {
    const double r = cum_regret[static_cast<std::size_t>(k - 1)];
    if (!(r > 0.0)) throw InvalidInput("fit_loglog_slope: nonpositive cumulative regret at k=" + std::to_string(k));
    design(k - k_min, 0) = std::log(static_cast<double>(k));
    design(k - k_min, 1) = 1.0;
    rhs(k - k_min) = std::log(r);
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  return {coef(0), coef(1)};
}

SlopeFit fit_loglog_slope(const RegretTrace& trace, int k_min, int k_max) {
  return fit_loglog_slope(trace.cum_regret, k_min, k_max);
}

GainDomination check_gain_domination(const Eigen::MatrixXd& kbar, const Eigen::MatrixXd& distinct_gram,
                                     const Eigen::VectorXd& counts, int horizon, double rho, double tolerance) {
  if (!(rho > 0.0)) throw InvalidInput("check_gain_domination: rho must be positive");
  GainDomination out;
  out.lhs = log_det_plus_identity(kbar, rho);
  // Sum over repeated points of phi phi^T equals N^{1/2} K N^{1/2} on the
  // distinct points, with the same nonzero spectrum.
  const Eigen::VectorXd root = counts.cwiseSqrt();
  const Eigen::MatrixXd weighted = root.asDiagonal() * distinct_gram * root.asDiagonal();
  out.rhs = log_det_plus_identity(weighted, rho / (2.0 * horizon));
  out.margin = out.rhs - out.lhs;
  out.holds = out.margin >= -tolerance;
  return out;
}

GainDomination check_gain_domination(const KernelSpec& spec, const std::vector<TrajectoryPair>& pairs, double rho) {
  if (pairs.empty()) return check_gain_domination(Eigen::MatrixXd(0, 0), Eigen::MatrixXd(0, 0), Eigen::VectorXd(0), 1, rho);
  const int horizon = static_cast<int>(pairs.front().horizon());
  std::map<std::vector<double>, int> index;
  std::vector<Point> distinct;
  std::vector<double> counts;
  auto add = [&](const PointSet& pts) {
    for (Eigen::Index r = 0; r < pts.rows(); ++r) {
      std::vector<double> key(static_cast<std::size_t>(pts.cols()));
      for (Eigen::Index c = 0; c < pts.cols(); ++c) key[static_cast<std::size_t>(c)] = pts(r, c);
      auto [it, inserted] = index.emplace(key, static_cast<int>(distinct.size()));
      if (inserted) {
        distinct.push_back(pts.row(r));
        counts.push_back(0.0);
      }
      counts[static_cast<std::size_t>(it->second)] += 1.0;
    }
  };
  for (const auto& p : pairs) {
    add(p.left);
    add(p.right);
  }
  PointSet points(static_cast<Eigen::Index>(distinct.size()), spec.dim);
  for (std::size_t i = 0; i < distinct.size(); ++i) points.row(static_cast<Eigen::Index>(i)) = distinct[i];
  const Eigen::VectorXd cnt = Eigen::Map<const Eigen::VectorXd>(counts.data(), static_cast<Eigen::Index>(counts.size()));
  return check_gain_domination(traj_diff_gram(spec, pairs), gram(spec, points), cnt, horizon, rho);
}

}  // namespace prosto
