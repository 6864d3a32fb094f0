#ifndef WPROX_ESTIMATORS_HPP_
#define WPROX_ESTIMATORS_HPP_

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Core>

#include "wprox/common.hpp"

namespace wprox {

/// Estimated grad log rho, one row per particle.
template <typename Scalar>
using ScoreField = Cloud<Scalar>;

/// log volume of the unit ball in R^d.
template <typename Scalar>
Scalar log_unit_ball_volume(Eigen::Index d) {
  const Scalar half = static_cast<Scalar>(d) / Scalar(2);
  return half * std::log(std::numbers::pi_v<Scalar>) - std::lgamma(half + Scalar(1));
}

/// Kozachenko-Leonenko (k = 1) estimate of int rho log rho, i.e. the
/// negative differential entropy:
///   -[ (d/m) sum_j log r_j + log V_d + log(m - 1) + gamma ]
/// with r_j the distance from point j to its nearest other point.
/// Exact O(m^2) neighbor search.
template <typename Derived>
typename Derived::Scalar kl_entropy_estimate(const Eigen::MatrixBase<Derived>& cloud) {
  using Scalar = typename Derived::Scalar;
  require_valid_cloud(cloud);
  const Eigen::Index m = cloud.rows();
  const Eigen::Index d = cloud.cols();
  require(m >= 2, "kl_entropy_estimate: need at least 2 points");
  const Cloud<Scalar> pts = cloud;
  Scalar sum_log_r = 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    Eigen::Index arg = -1;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k == j) continue;
      const Scalar r2 = (pts.row(j) - pts.row(k)).squaredNorm();
      if (r2 < best) {
        best = r2;
        arg = k;
      }
    }
    if (!(best > 0)) {
      throw std::invalid_argument("kl_entropy_estimate: duplicate points at indices " +
                                  std::to_string(j) + " and " + std::to_string(arg));
    }
    sum_log_r += Scalar(0.5) * std::log(best);
  }
  const Scalar entropy = static_cast<Scalar>(d) * sum_log_r / static_cast<Scalar>(m) +
                         log_unit_ball_volume<Scalar>(d) +
                         std::log(static_cast<Scalar>(m - 1)) + std::numbers::egamma_v<Scalar>;
  return -entropy;
}

/// Normalized Gaussian-kernel weights of every particle relative to `point`.
template <typename Scalar, typename DerivedP>
Vec<Scalar> kernel_softmax_weights(const Cloud<Scalar>& cloud,
                                   const Eigen::MatrixBase<DerivedP>& point, Scalar bandwidth) {
  const Scalar inv_h2 = Scalar(1) / (bandwidth * bandwidth);
  Vec<Scalar> logw(cloud.rows());
  for (Eigen::Index k = 0; k < cloud.rows(); ++k)
    logw(k) = -Scalar(0.5) * inv_h2 * (point - cloud.row(k)).squaredNorm();
  Vec<Scalar> w = (logw.array() - logw.maxCoeff()).exp().matrix();
  return w / w.sum();
}

/// Score of the Gaussian kernel density estimate of `cloud`, evaluated at
/// each row of `queries`:
///   grad log rho_hat(q) = -(1/h^2) sum_k w_k(q) (q - theta_k),
///   w_k(q) proportional to exp(-|q - theta_k|^2 / (2 h^2)).
template <typename DerivedC, typename DerivedQ>
ScoreField<typename DerivedC::Scalar> kernel_score_at(const Eigen::MatrixBase<DerivedC>& cloud,
                                                      const Eigen::MatrixBase<DerivedQ>& queries,
                                                      typename DerivedC::Scalar bandwidth) {
  using Scalar = typename DerivedC::Scalar;
  require_valid_cloud(cloud);
  require(bandwidth > 0 && std::isfinite(bandwidth), "kernel_score: bandwidth must be > 0");
  require(queries.cols() == cloud.cols(), "kernel_score: dimension mismatch");
  const Cloud<Scalar> pts = cloud;
  const Scalar inv_h2 = Scalar(1) / (bandwidth * bandwidth);
  ScoreField<Scalar> out(queries.rows(), pts.cols());
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    const auto point = queries.row(q);
    const Vec<Scalar> w = kernel_softmax_weights(pts, point, bandwidth);
    // sum_k w_k (q - theta_k) = q - sum_k w_k theta_k, since the weights sum to 1
    out.row(q) = -inv_h2 * (point - w.transpose() * pts);
  }
  return out;
}

/// kernel_score_at evaluated at the particles themselves (self-term included).
template <typename Derived>
ScoreField<typename Derived::Scalar> kernel_score(const Eigen::MatrixBase<Derived>& cloud,
                                                  typename Derived::Scalar bandwidth) {
  return kernel_score_at(cloud, cloud, bandwidth);
}

}  // namespace wprox

#endif  // WPROX_ESTIMATORS_HPP_
