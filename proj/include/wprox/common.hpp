#ifndef WPROX_COMMON_HPP_
#define WPROX_COMMON_HPP_

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace wprox {

/// m x d matrix, one particle per row. Represents (1/m) sum_j delta_{theta_j}.
template <typename Scalar>
using Cloud = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using ParticleCloud = Cloud<double>;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

template <typename Derived>
void require_valid_cloud(const Eigen::MatrixBase<Derived>& cloud, const char* name = "cloud") {
  require(cloud.rows() >= 1, std::string(name) + ": empty cloud");
  require(cloud.cols() >= 1, std::string(name) + ": zero dimension");
  require(cloud.allFinite(), std::string(name) + ": non-finite point");
}

}  // namespace wprox

#endif  // WPROX_COMMON_HPP_
