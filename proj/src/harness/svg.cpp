#include "wprox/harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>

#include "wprox/harness/persistence.hpp"

namespace wprox::harness {
namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 380;
constexpr double kLeft = 80, kRight = 190, kTop = 40, kBottom = 50;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// Multiples of a 1-2-5 step inside [lo, hi], about `target` of them.
std::vector<double> nice_ticks(double lo, double hi, int target) {
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double frac = raw / mag;
  const double step = (frac < 1.5 ? 1 : frac < 3.5 ? 2 : frac < 7.5 ? 5 : 10) * mag;
  std::vector<double> ticks;
  for (double k = std::ceil(lo / step); k * step <= hi + 1e-9 * step; k += 1)
    ticks.push_back(std::abs(k) < 0.5 ? 0.0 : k * step);
  return ticks;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

void render_panel(std::string& out, const Panel& panel, double y0) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const Series& s : panel.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (panel.log_y && s.y[i] <= 0)) continue;
      const double y = panel.log_y ? std::log10(s.y[i]) : s.y[i];
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double pad = 0.04 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return y0 + kTop + (1 - (y - ymin) / (ymax - ymin)) * ph; };

  out += "<text x=\"" + num(kLeft) + "\" y=\"" + num(y0 + 24) +
         "\" font-size=\"15\" font-weight=\"bold\">" + escape(panel.title) + "</text>\n";
  out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(y0 + kTop) + "\" width=\"" + num(pw) +
         "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"#333\"/>\n";

  // y ticks: decades on log panels, 1-2-5 steps otherwise
  std::vector<double> yticks;
  if (panel.log_y) {
    for (double e = std::ceil(ymin); e <= std::floor(ymax); e += 1) yticks.push_back(e);
    if (yticks.size() > 12) {
      std::vector<double> thinned;
      const auto stride = static_cast<std::size_t>(std::ceil(yticks.size() / 8.0));
      for (std::size_t i = 0; i < yticks.size(); i += stride) thinned.push_back(yticks[i]);
      yticks = thinned;
    }
  } else {
    yticks = nice_ticks(ymin, ymax, 5);
  }
  for (double t : yticks) {
    const double y = py(t);
    out += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kLeft + pw) +
           "\" y2=\"" + num(y) + "\" stroke=\"#ddd\"/>\n";
    const std::string label = panel.log_y ? "1e" + tick_label(t) : tick_label(t);
    out += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(y + 4) +
           "\" font-size=\"11\" text-anchor=\"end\">" + label + "</text>\n";
  }
  for (double xv : nice_ticks(xmin, xmax, 6)) {
    const double x = px(xv);
    out += "<text x=\"" + num(x) + "\" y=\"" + num(y0 + kTop + ph + 16) +
           "\" font-size=\"11\" text-anchor=\"middle\">" + tick_label(xv) + "</text>\n";
  }
  out += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(y0 + kHeight - 10) +
         "\" font-size=\"12\" text-anchor=\"middle\">" + escape(panel.x_label) + "</text>\n";
  out += "<text transform=\"translate(18," + num(y0 + kTop + ph / 2) +
         ") rotate(-90)\" font-size=\"12\" text-anchor=\"middle\">" +
         escape(panel.y_label + (panel.log_y ? " (log scale)" : "")) + "</text>\n";

  for (std::size_t k = 0; k < panel.series.size(); ++k) {
    const Series& s = panel.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (panel.log_y && s.y[i] <= 0)) continue;
      const double y = panel.log_y ? std::log10(s.y[i]) : s.y[i];
      pts += num(px(s.x[i])) + "," + num(py(y)) + " ";
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.6\"" + (s.dashed ? " stroke-dasharray=\"6,4\"" : "") +
           " points=\"" + pts + "\"/>\n";
    const double ly = y0 + kTop + 14 + 18.0 * k;
    const double lx = kLeft + pw + 12;
    out += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" + num(lx + 22) +
           "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"" +
           (s.dashed ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
    out += "<text x=\"" + num(lx + 28) + "\" y=\"" + num(ly) + "\" font-size=\"11\">" +
           escape(s.label) + "</text>\n";
  }
}

Series series_of(const std::string& label, const Trace& trace,
                 const std::function<std::optional<double>(const TraceRecord&)>& get) {
  Series s;
  s.label = label;
  for (const TraceRecord& r : trace) {
    if (const auto v = get(r)) {
      s.x.push_back(r.iteration);
      s.y.push_back(*v);
    }
  }
  return s;
}

}  // namespace

std::string render_svg(const std::vector<Panel>& panels) {
  if (panels.empty()) throw std::invalid_argument("render_svg: no panels");
  const double total_h = kHeight * static_cast<double>(panels.size());
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(total_h) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(total_h) +
         "\" font-family=\"sans-serif\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) render_panel(out, panels[i], kHeight * i);
  out += "</svg>\n";
  return out;
}

std::string render_trace_plot(const std::vector<LabeledTrace>& traces, PlotKind kind,
                              const PlotOptions& options) {
  if (traces.empty()) throw std::invalid_argument("emit_plot_svg: no traces");
  for (const auto& t : traces)
    if (t.trace.empty()) throw std::invalid_argument("emit_plot_svg: empty trace '" + t.label + "'");

  std::vector<Panel> panels;
  if (kind == PlotKind::kGaussian) {
    Panel kl{"KL divergence to target", "iteration n", "KL(rho_n || nu)", true, {}};
    Panel w2{"W2 distance to target", "iteration n", "W2(rho_n, nu)", true, {}};
    for (const auto& t : traces) {
      kl.series.push_back(series_of(t.label, t.trace, [](const TraceRecord& r) { return r.kl; }));
      w2.series.push_back(
          series_of(t.label, t.trace, [](const TraceRecord& r) { return r.w2_to_reference; }));
    }
    const Trace& first = traces.front().trace;
    if (first.front().kl) {
      const double kl0 = *first.front().kl;
      const double q = 1.0 + options.mu * options.step_xi;
      Series sharp{"KL0 (1+mu xi)^-2n", {}, {}, true};
      Series prior{"KL0 (1+mu xi)^-n", {}, {}, true};
      for (const TraceRecord& r : first) {
        sharp.x.push_back(r.iteration);
        sharp.y.push_back(kl0 * std::pow(q, -2.0 * r.iteration));
        prior.x.push_back(r.iteration);
        prior.y.push_back(kl0 * std::pow(q, -1.0 * r.iteration));
      }
      kl.series.push_back(sharp);
      kl.series.push_back(prior);
    }
    panels = {kl, w2};
  } else {
    Panel risk_panel{"L2-regularized risk R", "outer iteration n", "R", false, {}};
    Panel obj{"Total objective F_tau", "outer iteration n", "F_tau", false, {}};
    Panel w2{"Squared W2 to reference", "outer iteration n", "W2^2", true, {}};
    Panel beta{"Inexact error |beta|^2", "outer iteration n", "|beta|^2", true, {}};
    for (const auto& t : traces) {
      risk_panel.series.push_back(
          series_of(t.label, t.trace, [](const TraceRecord& r) { return r.risk; }));
      obj.series.push_back(
          series_of(t.label, t.trace, [](const TraceRecord& r) { return r.total_objective; }));
      w2.series.push_back(series_of(t.label, t.trace, [](const TraceRecord& r) {
        return r.w2_to_reference ? std::optional<double>(*r.w2_to_reference * *r.w2_to_reference)
                                 : std::nullopt;
      }));
      Series b = series_of(t.label, t.trace, [](const TraceRecord& r) { return r.beta_norm_sq; });
      if (!b.x.empty()) beta.series.push_back(b);
    }
    panels = {risk_panel, obj};
    if (!w2.series.front().x.empty()) panels.push_back(w2);
    if (!beta.series.empty()) panels.push_back(beta);
  }
  return render_svg(panels);
}

void emit_plot_svg(const std::vector<LabeledTrace>& traces, PlotKind kind,
                   const std::filesystem::path& path, const PlotOptions& options) {
  write_text_file(path, render_trace_plot(traces, kind, options));
}

}  // namespace wprox::harness
