#ifndef WPROX_TRACE_HPP_
#define WPROX_TRACE_HPP_

#include <optional>
#include <vector>

namespace wprox {

/// Diagnostics after one outer iteration. Quantities that a given run does
/// not produce stay empty.
struct TraceRecord {
  int iteration = 0;
  std::optional<double> risk;
  /// Estimate of int rho log rho (negative differential entropy).
  std::optional<double> entropy;
  std::optional<double> total_objective;
  /// W2 to the reference cloud, or to the target on the Gaussian path.
  std::optional<double> w2_to_reference;
  std::optional<double> kl;
  std::optional<double> contraction_ratio;
  std::optional<double> beta_norm_sq;
  std::optional<double> inner_final_loss;
  double wall_time_s = 0.0;
};

using Trace = std::vector<TraceRecord>;

}  // namespace wprox

#endif  // WPROX_TRACE_HPP_
