#ifndef WPROX_HARNESS_SVG_HPP_
#define WPROX_HARNESS_SVG_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "wprox/trace.hpp"

namespace wprox::harness {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<Series> series;
};

/// Standalone SVG, panels stacked vertically. On log panels nonpositive
/// values are skipped.
std::string render_svg(const std::vector<Panel>& panels);

struct LabeledTrace {
  std::string label;
  Trace trace;
};

enum class PlotKind { kGaussian, kMfld };

struct PlotOptions {
  double step_xi = 0.1;
  double mu = 1.0;
};

/// kGaussian: KL panel (log) with the (1+mu xi)^{-2n} and (1+mu xi)^{-n}
/// envelopes from KL_0, plus W2-to-target (log).
/// kMfld: risk, total objective, W2^2 to reference (log) and, when present,
/// beta_norm_sq (log). Throws on empty input.
std::string render_trace_plot(const std::vector<LabeledTrace>& traces, PlotKind kind,
                              const PlotOptions& options = {});
void emit_plot_svg(const std::vector<LabeledTrace>& traces, PlotKind kind,
                   const std::filesystem::path& path, const PlotOptions& options = {});

}  // namespace wprox::harness

#endif  // WPROX_HARNESS_SVG_HPP_
