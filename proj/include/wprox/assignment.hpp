#ifndef WPROX_ASSIGNMENT_HPP_
#define WPROX_ASSIGNMENT_HPP_

#include <limits>
#include <vector>

#include <Eigen/Core>

namespace wprox {

/// Minimum-cost perfect matching on an n x n cost, O(n^3) Hungarian method
/// with row potentials and shortest augmenting paths.
/// `cost(i, j)` is queried lazily. Returns col_of_row.
template <typename Scalar, typename CostFn>
std::vector<Eigen::Index> solve_assignment(Eigen::Index n, CostFn&& cost) {
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  // 1-based arrays; index 0 is the virtual root column.
  std::vector<Scalar> u(n + 1, Scalar(0)), v(n + 1, Scalar(0)), minv(n + 1);
  std::vector<Eigen::Index> row_of_col(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (Eigen::Index i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    Eigen::Index j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const Eigen::Index i0 = row_of_col[j0];
      Scalar delta = inf;
      Eigen::Index j1 = 0;
      for (Eigen::Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const Scalar cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Eigen::Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != 0);
    do {
      const Eigen::Index j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Eigen::Index> col_of_row(n);
  for (Eigen::Index j = 1; j <= n; ++j) col_of_row[row_of_col[j] - 1] = j - 1;
  return col_of_row;
}

}  // namespace wprox

#endif  // WPROX_ASSIGNMENT_HPP_
