#ifndef PROSTO_GP_REGRESSION_HPP
#define PROSTO_GP_REGRESSION_HPP

#include "prosto/kernel.hpp"
#include "prosto/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

namespace prosto {

/// Kernel ridge regression / GP posterior in dual form.
///
///   mean(z) = k_Z(z)^T (K + ridge I)^{-1} y
///   var(z)  = k(z,z) - k_Z(z)^T (K + ridge I)^{-1} k_Z(z)
///
/// var(z) / ridge equals the elliptic potential phi(z)^T (Phi^T Phi + ridge I)^{-1} phi(z)
/// of the primal form. The model is immutable after fitting. It can be built
/// either from points (fit) or from a precomputed anchor Gram (from_gram), in
/// which case queries must supply their own cross-kernel rows.
template <typename Scalar>
class KrrModel {
 public:
  static KrrModel fit(const KernelSpec& spec, const MatrixX<Scalar>& anchors, const VectorX<Scalar>& targets,
                      Scalar ridge) {
    if (anchors.rows() != targets.size()) throw InvalidInput("krr_fit: anchors and targets differ in length");
    KrrModel model = from_gram(gram(spec, anchors), ridge);
    model.spec_ = spec;
    model.anchors_ = anchors;
    model.set_targets(targets);
    return model;
  }

  /// Variance-only model over a precomputed Gram; call set_targets to enable means.
  static KrrModel from_gram(const MatrixX<Scalar>& anchor_gram, Scalar ridge) {
    if (!(ridge > Scalar(0))) throw InvalidInput("krr_fit: ridge must be positive");
    if (anchor_gram.rows() != anchor_gram.cols()) throw InvalidInput("krr_fit: Gram is not square");
    KrrModel model;
    model.ridge_ = ridge;
    MatrixX<Scalar> reg = anchor_gram;
    reg.diagonal().array() += ridge;
    auto factor = psd_factorize(reg);
    model.lower_ = std::move(factor.lower);
    return model;
  }

  void set_targets(const VectorX<Scalar>& targets) {
    if (targets.size() != lower_.rows()) throw InvalidInput("krr: target count does not match anchors");
    dual_weights_ = VectorX<Scalar>(solve(targets));
  }

  Eigen::Index size() const { return lower_.rows(); }
  Scalar ridge() const { return ridge_; }
  bool has_targets() const { return dual_weights_.has_value(); }
  const VectorX<Scalar>& dual_weights() const { return *dual_weights_; }

  /// (K + ridge I)^{-1} rhs.
  template <typename Derived>
  MatrixX<Scalar> solve(const Eigen::MatrixBase<Derived>& rhs) const {
    if (lower_.rows() == 0) return MatrixX<Scalar>(0, rhs.cols());
    MatrixX<Scalar> x = lower_.template triangularView<Eigen::Lower>().solve(rhs);
    lower_.transpose().template triangularView<Eigen::Upper>().solveInPlace(x);
    return x;
  }

  /// Smoother matrix cross (K + ridge I)^{-1}; row i maps targets to mean at query i.
  MatrixX<Scalar> smoother(const MatrixX<Scalar>& cross) const {
    check_cross(cross);
    return solve(cross.transpose()).transpose();
  }

  VectorX<Scalar> mean(const MatrixX<Scalar>& cross) const {
    check_cross(cross);
    if (!dual_weights_) throw InvalidInput("krr: model has no targets");
    if (size() == 0) return VectorX<Scalar>::Zero(cross.rows());
    return cross * *dual_weights_;
  }

  /// Posterior variance at each query row, clamped at zero.
  VectorX<Scalar> variance(const MatrixX<Scalar>& cross, const VectorX<Scalar>& prior_diag) const {
    check_cross(cross);
    if (size() == 0) return prior_diag.cwiseMax(Scalar(0));
    MatrixX<Scalar> w = lower_.template triangularView<Eigen::Lower>().solve(cross.transpose());
    VectorX<Scalar> reduction = w.colwise().squaredNorm().transpose();
    return (prior_diag - reduction).cwiseMax(Scalar(0));
  }

  Scalar mean(const RowVectorX<Scalar>& z) const { return mean(query_cross(z))(0); }

  Scalar stddev(const RowVectorX<Scalar>& z) const {
    return std::sqrt(variance(query_cross(z), VectorX<Scalar>::Ones(1))(0));
  }

 private:
  MatrixX<Scalar> query_cross(const RowVectorX<Scalar>& z) const {
    if (!spec_) throw InvalidInput("krr: point queries require a model fitted on points");
    if (z.size() != spec_->dim) throw InvalidInput("krr: query dimension mismatch");
    return cross_gram(*spec_, z, anchors_);
  }

  void check_cross(const MatrixX<Scalar>& cross) const {
    if (cross.cols() != size()) throw InvalidInput("krr: cross-kernel columns do not match anchors");
  }

  std::optional<KernelSpec> spec_;
  MatrixX<Scalar> anchors_;
  MatrixX<Scalar> lower_;
  Scalar ridge_ = Scalar(1);
  std::optional<VectorX<Scalar>> dual_weights_;
};

/// Information gain log det(I + K / rho).
template <typename Derived>
typename Derived::Scalar information_gain(const Eigen::MatrixBase<Derived>& gram_matrix,
                                          typename Derived::Scalar rho) {
  return log_det_plus_identity(gram_matrix, rho);
}

}  // namespace prosto

#endif  // PROSTO_GP_REGRESSION_HPP
