#ifndef PROSTO_KERNEL_HPP
#define PROSTO_KERNEL_HPP

#include "prosto/common.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace prosto {

enum class KernelFamily { matern, squared_exponential };

/// Stationary unit-variance kernel on [0,1]^dim with Euclidean distances.
///
/// Matérn kernels are evaluated in closed form, so only nu in {0.5, 1.5, 2.5}
/// is accepted. For the squared-exponential family nu is ignored.
struct KernelSpec {
  KernelFamily family = KernelFamily::matern;
  double nu = 2.5;
  double lengthscale = 0.2;
  int dim = 3;

  static KernelSpec matern(double nu, double lengthscale, int dim) {
    KernelSpec s{KernelFamily::matern, nu, lengthscale, dim};
    s.validate();
    return s;
  }

  static KernelSpec squared_exponential(double lengthscale, int dim) {
    KernelSpec s{KernelFamily::squared_exponential, 0.0, lengthscale, dim};
    s.validate();
    return s;
  }

  void validate() const {
    if (!(lengthscale > 0.0) || !std::isfinite(lengthscale))
      throw InvalidInput("kernel lengthscale must be positive and finite");
    if (dim <= 0) throw InvalidInput("kernel input dimension must be positive");
    if (family == KernelFamily::matern && nu != 0.5 && nu != 1.5 && nu != 2.5)
      throw InvalidInput("closed-form Matérn requires nu in {0.5, 1.5, 2.5}, got " +
                         std::to_string(nu));
  }
};

inline std::string to_string(KernelFamily f) {
  return f == KernelFamily::matern ? "matern" : "squared_exponential";
}

namespace detail {

// Kernel value as a function of the unscaled distance. No argument checks.
template <typename Scalar>
inline Scalar kernel_from_distance(const KernelSpec& spec, Scalar dist) {
  using std::exp;
  using std::sqrt;
  const Scalar r = dist / Scalar(spec.lengthscale);
  if (spec.family == KernelFamily::squared_exponential) return exp(Scalar(-0.5) * r * r);
  if (spec.nu == 0.5) return exp(-r);
  if (spec.nu == 1.5) {
    const Scalar s = sqrt(Scalar(3)) * r;
    return (Scalar(1) + s) * exp(-s);
  }
  const Scalar s = sqrt(Scalar(5)) * r;
  return (Scalar(1) + s + s * s / Scalar(3)) * exp(-s);
}

}  // namespace detail

/// k(z1, z2). Both arguments must be vectors of length spec.dim with finite
/// entries; throws InvalidInput otherwise.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar kernel_eval(const KernelSpec& spec, const Eigen::MatrixBase<DerivedA>& z1,
                                      const Eigen::MatrixBase<DerivedB>& z2) {
  using Scalar = typename DerivedA::Scalar;
  if (z1.size() != spec.dim || z2.size() != spec.dim)
    throw InvalidInput("kernel_eval: point dimension does not match kernel dim " +
                       std::to_string(spec.dim));
  if (!z1.allFinite() || !z2.allFinite()) throw InvalidInput("kernel_eval: non-finite coordinate");
  Scalar sq(0);
  for (Eigen::Index i = 0; i < z1.size(); ++i) {
    const Scalar diff = z1.derived().coeff(i) - z2.derived().coeff(i);
    sq += diff * diff;
  }
  return detail::kernel_from_distance<Scalar>(spec, std::sqrt(sq));
}

/// Cross-kernel matrix k(a_i, b_j) between two point sets (one point per row).
template <typename DerivedA, typename DerivedB>
MatrixX<typename DerivedA::Scalar> cross_gram(const KernelSpec& spec, const Eigen::MatrixBase<DerivedA>& a,
                                              const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if ((a.rows() > 0 && a.cols() != spec.dim) || (b.rows() > 0 && b.cols() != spec.dim))
    throw InvalidInput("cross_gram: point dimension does not match kernel dim");
  if (!a.allFinite() || !b.allFinite()) throw InvalidInput("cross_gram: non-finite coordinate");
  MatrixX<Scalar> out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      out(i, j) = detail::kernel_from_distance<Scalar>(spec, (a.row(i) - b.row(j)).norm());
  return out;
}

/// Symmetric Gram matrix of a point set. An empty set yields a 0x0 matrix.
template <typename Derived>
MatrixX<typename Derived::Scalar> gram(const KernelSpec& spec, const Eigen::MatrixBase<Derived>& points) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = points.rows();
  if (n > 0 && points.cols() != spec.dim) throw InvalidInput("gram: point dimension does not match kernel dim");
  if (!points.allFinite()) throw InvalidInput("gram: non-finite coordinate");
  MatrixX<Scalar> k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = Scalar(1);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const Scalar v = detail::kernel_from_distance<Scalar>(spec, (points.row(i) - points.row(j)).norm());
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

/// Polynomial eigen-decay exponent 2 nu / d + 1 of the Matérn family. The
/// squared-exponential kernel decays faster than any polynomial and returns
/// +infinity.
inline double eigen_decay_beta(const KernelSpec& spec) {
  if (spec.dim <= 0) throw InvalidInput("eigen_decay_beta: dimension must be positive");
  if (spec.family == KernelFamily::squared_exponential) return std::numeric_limits<double>::infinity();
  return 2.0 * spec.nu / spec.dim + 1.0;
}

}  // namespace prosto

#endif  // PROSTO_KERNEL_HPP
