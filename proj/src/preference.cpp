#include "prosto/preference.hpp"

#include "prosto/linalg.hpp"

#include <cmath>

namespace prosto {

namespace {

// Stacks every pair's points (left rows, then right rows) and returns the
// signed incidence matrix mapping pooled points to difference features.
struct PooledPairs {
  PointSet points;
  Eigen::MatrixXd incidence;
};

PooledPairs pool(const KernelSpec& spec, const std::vector<TrajectoryPair>& pairs) {
  PooledPairs out;
  if (pairs.empty()) {
    out.points.resize(0, spec.dim);
    out.incidence.resize(0, 0);
    return out;
  }
  const Eigen::Index horizon = pairs.front().horizon();
  const auto t = static_cast<Eigen::Index>(pairs.size());
  out.points.resize(2 * horizon * t, spec.dim);
  out.incidence = Eigen::MatrixXd::Zero(2 * horizon * t, t);
  for (Eigen::Index i = 0; i < t; ++i) {
    const TrajectoryPair& p = pairs[static_cast<std::size_t>(i)];
    if (p.left.rows() != horizon || p.right.rows() != horizon)
      throw InvalidInput("trajectory pairs must share one horizon");
    if (p.left.cols() != spec.dim || p.right.cols() != spec.dim)
      throw InvalidInput("trajectory point dimension does not match kernel dim");
    const Eigen::Index base = 2 * horizon * i;
    out.points.middleRows(base, horizon) = p.left;
    out.points.middleRows(base + horizon, horizon) = p.right;
    out.incidence.block(base, i, horizon, 1).setOnes();
    out.incidence.block(base + horizon, i, horizon, 1).setConstant(-1.0);
  }
  return out;
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double btl_probability(double sum_left, double sum_right) { return sigmoid(sum_left - sum_right); }

int sample_preference(double p, Rng& rng) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("sample_preference: probability must lie in (0,1)");
  return uniform01(rng) < p ? 1 : 0;
}

double kappa_z(int horizon) {
  if (horizon < 1) throw InvalidInput("kappa_z: horizon must be >= 1");
  const double s = sigmoid(static_cast<double>(horizon));
  return 1.0 / (s * (1.0 - s));
}

double traj_diff_inner(const KernelSpec& spec, const TrajectoryPair& a, const TrajectoryPair& b) {
  if (a.horizon() != b.horizon()) throw InvalidInput("traj_diff_inner: horizons differ");
  return (cross_gram(spec, a.left, b.left) - cross_gram(spec, a.left, b.right) - cross_gram(spec, a.right, b.left) +
          cross_gram(spec, a.right, b.right))
      .sum();
}

Eigen::MatrixXd traj_diff_gram(const KernelSpec& spec, const std::vector<TrajectoryPair>& pairs) {
  if (pairs.empty()) return Eigen::MatrixXd(0, 0);
  PooledPairs pooled = pool(spec, pairs);
  Eigen::MatrixXd kbar = pooled.incidence.transpose() * gram(spec, pooled.points) * pooled.incidence;
  return (kbar + kbar.transpose()) / 2.0;
}

Eigen::VectorXd traj_diff_cross(const KernelSpec& spec, const std::vector<TrajectoryPair>& pairs, const Point& z) {
  if (z.size() != spec.dim) throw InvalidInput("traj_diff_cross: query dimension mismatch");
  return traj_diff_cross(spec, pairs, PointSet(z)).row(0).transpose();
}

Eigen::MatrixXd traj_diff_cross(const KernelSpec& spec, const std::vector<TrajectoryPair>& pairs,
                                const PointSet& queries) {
  if (pairs.empty()) return Eigen::MatrixXd(queries.rows(), 0);
  PooledPairs pooled = pool(spec, pairs);
  return cross_gram(spec, queries, pooled.points) * pooled.incidence;
}

double klrr_objective(const Eigen::MatrixXd& kbar, const Eigen::VectorXd& labels, double tau,
                      const Eigen::VectorXd& alpha) {
  const Eigen::VectorXd s = kbar * alpha;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) loss += softplus(s(i)) - labels(i) * s(i);
  return loss + tau * alpha.dot(s);
}

KlrrSolution klrr_solve(const Eigen::MatrixXd& kbar, const Eigen::VectorXd& labels, double tau, double tol,
                        int max_iters, const Eigen::VectorXd& warm_start) {
  if (!(tau > 0.0)) throw InvalidInput("klrr: tau must be positive");
  if (!(tol > 0.0)) throw InvalidInput("klrr: tol must be positive");
  const Eigen::Index n = labels.size();
  if (kbar.rows() != n || kbar.cols() != n) throw InvalidInput("klrr: Gram and labels differ in size");
  if (warm_start.size() > n) throw InvalidInput("klrr: warm start longer than data");

  KlrrSolution sol;
  sol.alpha = Eigen::VectorXd::Zero(n);
  sol.alpha.head(warm_start.size()) = warm_start;
  if (n == 0) {
    sol.converged = true;
    return sol;
  }

  // With r = sigma(s) - y + 2 tau alpha the gradient is Kbar r and the Hessian
  // is Kbar (D Kbar + 2 tau I). The step -(D Kbar + 2 tau I)^{-1} r solves the
  // Newton system even when Kbar is singular; it is evaluated through the
  // symmetric matrix 2 tau I + S Kbar S with S = D^{1/2}.
  auto residual = [&](const Eigen::VectorXd& alpha, Eigen::VectorXd& s, Eigen::VectorXd& p) {
    s = kbar * alpha;
    p = s.unaryExpr([](double v) { return sigmoid(v); });
    return Eigen::VectorXd(p - labels + 2.0 * tau * alpha);
  };

  Eigen::VectorXd s, p;
  Eigen::VectorXd r = residual(sol.alpha, s, p);
  Eigen::VectorXd grad = kbar * r;
  double obj = klrr_objective(kbar, labels, tau, sol.alpha);

  int iter = 0;
  for (; iter < max_iters && grad.lpNorm<Eigen::Infinity>() > tol; ++iter) {
    const Eigen::VectorXd sqrt_d = (p.array() * (1.0 - p.array())).sqrt().matrix();
    Eigen::MatrixXd b = sqrt_d.asDiagonal() * kbar * sqrt_d.asDiagonal();
    b.diagonal().array() += 2.0 * tau;
    Eigen::LLT<Eigen::MatrixXd> llt(b);
    const Eigen::VectorXd kr = kbar * r;
    const Eigen::VectorXd inner = sqrt_d.cwiseProduct(llt.solve(sqrt_d.cwiseProduct(kr)));
    const Eigen::VectorXd step = -(r - inner) / (2.0 * tau);

    const double slope = grad.dot(step);
    const double grad_norm = grad.lpNorm<Eigen::Infinity>();
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd cand_s, cand_p, cand_r, cand_grad;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd cand = sol.alpha + t * step;
      const double cand_obj = klrr_objective(kbar, labels, tau, cand);
      cand_r = residual(cand, cand_s, cand_p);
      cand_grad = kbar * cand_r;
      const bool armijo = cand_obj <= obj + 1e-4 * t * slope;
      // Near the optimum objective differences drop below round-off; a full
      // step that shrinks the gradient is then accepted.
      const bool roundoff = cand_obj <= obj + 1e-12 * (1.0 + std::abs(obj)) &&
                            cand_grad.lpNorm<Eigen::Infinity>() < grad_norm;
      if (armijo || roundoff) {
        sol.alpha = std::move(cand);
        obj = cand_obj;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    s = cand_s;
    p = cand_p;
    r = cand_r;
    grad = cand_grad;
  }
  sol.iterations = iter;
  sol.grad_norm = grad.lpNorm<Eigen::Infinity>();
  sol.objective = obj;
  sol.converged = sol.grad_norm <= tol;
  return sol;
}

DualRewardEstimate klrr_fit(const KernelSpec& spec, const std::vector<PreferenceRecord>& records, double tau,
                            double tol, int max_iters) {
  DualRewardEstimate est;
  est.ridge = tau;
  est.anchor_pairs.reserve(records.size());
  Eigen::VectorXd labels(static_cast<Eigen::Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].label != 0 && records[i].label != 1) throw InvalidInput("klrr_fit: labels must be 0 or 1");
    est.anchor_pairs.push_back(records[i].pair);
    labels(static_cast<Eigen::Index>(i)) = records[i].label;
  }
  const Eigen::MatrixXd kbar = traj_diff_gram(spec, est.anchor_pairs);
  KlrrSolution sol = klrr_solve(kbar, labels, tau, tol, max_iters);
  est.alpha = std::move(sol.alpha);
  est.newton_iters = sol.iterations;
  est.final_grad_norm = sol.grad_norm;
  est.converged = sol.converged;
  return est;
}

double reward_eval(const DualRewardEstimate& est, const KernelSpec& spec, const Point& z) {
  if (est.anchor_pairs.empty()) return 0.0;
  return traj_diff_cross(spec, est.anchor_pairs, z).dot(est.alpha);
}

double beta_reward(double delta, int horizon, double tau, const Eigen::MatrixXd& kbar, double c_r) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("beta_reward: delta must lie in (0,1)");
  if (!(tau > 0.0)) throw InvalidInput("beta_reward: tau must be positive");
  if (!(c_r > 0.0 && c_r <= 1.0)) throw InvalidInput("beta_reward: c_r must lie in (0,1]");
  const double gain = log_det_plus_identity(kbar, tau);
  return c_r * 3.0 * horizon * kappa_z(horizon) * (2.0 * std::sqrt(2.0 * std::log(1.0 / delta) + gain) + std::sqrt(tau));
}

}  // namespace prosto
