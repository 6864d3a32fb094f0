#ifndef WPROX_HARNESS_ANALYSIS_HPP_
#define WPROX_HARNESS_ANALYSIS_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "wprox/trace.hpp"

namespace wprox::harness {

/// Median of the trailing half of a series.
inline double plateau_floor(const std::vector<double>& y) {
  if (y.empty()) return 0.0;
  std::vector<double> tail(y.begin() + static_cast<long>(y.size() / 2), y.end());
  std::sort(tail.begin(), tail.end());
  const std::size_t n = tail.size();
  return n % 2 ? tail[n / 2] : 0.5 * (tail[n / 2 - 1] + tail[n / 2]);
}

struct RateFit {
  double factor = 1.0;  // exp(slope of log y per iteration)
  int first = 0;
  int last = 0;         // inclusive
  double floor = 0.0;
};

/// Log-linear fit over the pre-plateau window: from index 0 up to the first
/// index (at least 2) whose value falls below 2 x plateau_floor.
inline RateFit early_phase_fit(const std::vector<double>& y) {
  RateFit fit;
  fit.floor = plateau_floor(y);
  if (y.size() < 3) return fit;
  int last = static_cast<int>(y.size()) - 1;
  for (int n = 2; n < static_cast<int>(y.size()); ++n) {
    if (y[n] <= 2.0 * fit.floor) {
      last = n;
      break;
    }
  }
  fit.last = last;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (int n = 0; n <= last; ++n) {
    if (!(y[n] > 0)) continue;
    const double ly = std::log(y[n]);
    sx += n;
    sy += ly;
    sxx += double(n) * n;
    sxy += n * ly;
    ++count;
  }
  if (count >= 2) {
    const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    fit.factor = std::exp(slope);
  }
  return fit;
}

/// Squared W2-to-reference values of a trace, in iteration order.
inline std::vector<double> w2_sq_series(const Trace& trace) {
  std::vector<double> out;
  for (const auto& r : trace)
    if (r.w2_to_reference) out.push_back(*r.w2_to_reference * *r.w2_to_reference);
  return out;
}

}  // namespace wprox::harness

#endif  // WPROX_HARNESS_ANALYSIS_HPP_
