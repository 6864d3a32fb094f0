#ifndef WPROX_MEASURES_HPP_
#define WPROX_MEASURES_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wprox/assignment.hpp"
#include "wprox/common.hpp"
#include "wprox/rng.hpp"

namespace wprox {

/// One-dimensional Gaussian law N(mean, stddev^2).
template <typename Scalar>
struct GaussianState {
  Scalar mean{0};
  Scalar stddev{1};

  static GaussianState from_variance(Scalar mean, Scalar variance) {
    return {mean, std::sqrt(variance)};
  }
  Scalar variance() const { return stddev * stddev; }
  bool valid() const { return std::isfinite(mean) && std::isfinite(stddev) && stddev > 0; }
};

template <typename Scalar>
void require_valid(const GaussianState<Scalar>& g) {
  require(g.valid(), "GaussianState: stddev must be finite and > 0");
}

/// W2 between 1-D Gaussians: sqrt((m1-m2)^2 + (s1-s2)^2).
template <typename Scalar>
Scalar w2_gaussian_1d(const GaussianState<Scalar>& a, const GaussianState<Scalar>& b) {
  require_valid(a);
  require_valid(b);
  const Scalar dm = a.mean - b.mean;
  const Scalar ds = a.stddev - b.stddev;
  return std::sqrt(dm * dm + ds * ds);
}

/// Largest replicated problem size accepted for unequal cloud sizes.
inline constexpr Eigen::Index kMaxTransportSize = 4096;

/// Exact W2 between uniform empirical measures.
///
/// Equal sizes solve an assignment problem. For m != n, each point is
/// replicated so both sides have lcm(m, n) atoms of equal mass; the uniform
/// transportation polytope has integral vertices, so the assignment optimum
/// on the replicas is the exact transport cost.
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar w2_discrete(const Eigen::MatrixBase<DerivedX>& x,
                                      const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  require_valid_cloud(x, "w2_discrete x");
  require_valid_cloud(y, "w2_discrete y");
  require(x.cols() == y.cols(), "w2_discrete: dimension mismatch (" + std::to_string(x.cols()) +
                                    " vs " + std::to_string(y.cols()) + ")");
  const Eigen::Index m = x.rows();
  const Eigen::Index n = y.rows();
  const Eigen::Index size = std::lcm(m, n);
  require(size <= kMaxTransportSize,
          "w2_discrete: lcm of cloud sizes " + std::to_string(size) + " exceeds " +
              std::to_string(kMaxTransportSize));
  const Eigen::Index rep_x = size / m;
  const Eigen::Index rep_y = size / n;
  // Row-major replicated cost; the solver scans one row per inner loop.
  std::vector<Scalar> full(static_cast<std::size_t>(size * size));
  for (Eigen::Index r = 0; r < size; ++r) {
    const auto xi = x.row(r / rep_x);
    Scalar* dst = full.data() + r * size;
    for (Eigen::Index j = 0; j < n; ++j) {
      const Scalar c = (xi - y.row(j)).squaredNorm();
      std::fill(dst + j * rep_y, dst + (j + 1) * rep_y, c);
    }
  }
  auto cost = [&](Eigen::Index r, Eigen::Index c) { return full[r * size + c]; };
  const auto match = solve_assignment<Scalar>(size, cost);

  // Sorted summation makes the result independent of argument order.
  std::vector<Scalar> matched(size);
  for (Eigen::Index r = 0; r < size; ++r) matched[r] = cost(r, match[r]);
  std::sort(matched.begin(), matched.end());
  Scalar total = 0;
  for (Scalar c : matched) total += c;
  return std::sqrt(total / static_cast<Scalar>(size));
}

/// m i.i.d. draws from N(mean, stddev^2 I).
template <typename Scalar = double>
Cloud<Scalar> sample_gaussian_cloud(const Vec<Scalar>& mean, Scalar stddev, Eigen::Index m,
                                    SeededRng& rng) {
  require(stddev > 0 && std::isfinite(stddev), "sample_gaussian_cloud: stddev must be > 0");
  require(m >= 1 && mean.size() >= 1, "sample_gaussian_cloud: need m >= 1 and d >= 1");
  Cloud<Scalar> out = rng.normal_matrix<Scalar>(m, mean.size()) * stddev;
  out.rowwise() += mean.transpose();
  return out;
}

}  // namespace wprox

#endif  // WPROX_MEASURES_HPP_
