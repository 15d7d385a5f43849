#ifndef PROSTO_LINALG_HPP
#define PROSTO_LINALG_HPP

#include "prosto/common.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace prosto {

inline const std::vector<double>& default_jitter_schedule() {
  static const std::vector<double> schedule{0.0, 1e-10, 1e-8, 1e-6};
  return schedule;
}

template <typename Scalar>
struct PsdFactor {
  MatrixX<Scalar> lower;
  Scalar jitter = Scalar(0);
};

template <typename Derived>
typename Derived::Scalar min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() == 0) return Scalar(0);
  MatrixX<Scalar> sym = (m + m.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Cholesky factor L with L L^T = m + j I for the first jitter j of the
/// schedule that factorizes. Throws NotPsdError with the smallest eigenvalue
/// of m when every jitter fails.
template <typename Derived>
PsdFactor<typename Derived::Scalar> psd_factorize(const Eigen::MatrixBase<Derived>& m,
                                                  const std::vector<double>& jitter_schedule = default_jitter_schedule()) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) throw InvalidInput("psd_factorize: matrix is not square");
  const Eigen::Index n = m.rows();
  if (n == 0) return {MatrixX<Scalar>(0, 0), Scalar(0)};
  if (!m.allFinite()) throw InvalidInput("psd_factorize: non-finite entry");
  for (double j : jitter_schedule) {
    MatrixX<Scalar> shifted = m;
    shifted.diagonal().array() += Scalar(j);
    Eigen::LLT<MatrixX<Scalar>> llt(shifted);
    if (llt.info() == Eigen::Success) return {MatrixX<Scalar>(llt.matrixL()), Scalar(j)};
  }
  const Scalar lo = min_eigenvalue(m);
  throw NotPsdError("psd_factorize: matrix is not positive semidefinite (min eigenvalue " +
                        std::to_string(static_cast<double>(lo)) + ")",
                    static_cast<double>(lo));
}

/// log det(I + m / rho) for a symmetric PSD m.
template <typename Derived>
typename Derived::Scalar log_det_plus_identity(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar rho) {
  using Scalar = typename Derived::Scalar;
  if (!(rho > Scalar(0))) throw InvalidInput("log_det_plus_identity: rho must be positive");
  const Eigen::Index n = m.rows();
  if (n == 0) return Scalar(0);
  MatrixX<Scalar> a = m / rho;
  a.diagonal().array() += Scalar(1);
  Eigen::LLT<MatrixX<Scalar>> llt(a);
  if (llt.info() == Eigen::Success)
    return Scalar(2) * llt.matrixLLT().diagonal().array().log().sum();
  // Round-off made I + m/rho indefinite; fall back to clamped eigenvalues.
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es((a + a.transpose()) / Scalar(2), Eigen::EigenvaluesOnly);
  return es.eigenvalues().array().max(Scalar(1e-300)).log().sum();
}

/// Symmetric square root factor of a PSD matrix with negative eigenvalues
/// clamped to zero. Returns F with F F^T equal to the clamped matrix; the
/// total clamped magnitude is written to clamped_mass.
template <typename Derived>
MatrixX<typename Derived::Scalar> clamped_sqrt_factor(const Eigen::MatrixBase<Derived>& m,
                                                      typename Derived::Scalar* clamped_mass = nullptr) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> sym = (m + m.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(sym);
  VectorX<Scalar> vals = es.eigenvalues();
  Scalar mass(0);
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals(i) < Scalar(0)) {
      mass -= vals(i);
      vals(i) = Scalar(0);
    }
  }
  if (clamped_mass) *clamped_mass = mass;
  return es.eigenvectors() * vals.cwiseSqrt().asDiagonal();
}

}  // namespace prosto

#endif  // PROSTO_LINALG_HPP
