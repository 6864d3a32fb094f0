#include "wprox/harness/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "wprox/estimators.hpp"
#include "wprox/gaussian_prox.hpp"
#include "wprox/harness/analysis.hpp"
#include "wprox/harness/csv.hpp"
#include "wprox/harness/format.hpp"
#include "wprox/harness/svg.hpp"
#include "wprox/measures.hpp"
#include "wprox/objectives.hpp"
#include "wprox/prox_trainer.hpp"

namespace wprox::harness {
namespace {

namespace fs = std::filesystem;

int g_workers = 0;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string config_hash(const ExperimentConfig& cfg) { return hex64(fnv1a64(resolved_text(cfg))); }

void write_resolved(const ExperimentConfig& cfg) {
  write_text_file(fs::path(cfg.output_dir) / "resolved_config.toml", resolved_text(cfg));
}

Metadata run_metadata(const ExperimentConfig& cfg, const MfldRunConfig& run) {
  return {{"config_hash", config_hash(cfg)},
          {"data_seed", std::to_string(run.data_seed)},
          {"weight_seed", std::to_string(run.weight_seed)},
          {"noise_seed", std::to_string(run.noise_seed)},
          {"particles", std::to_string(run.particles)},
          {"kind", to_string(cfg.kind)}};
}

void write_dataset(const ExperimentConfig& cfg, const Dataset<double>& data) {
  std::vector<std::string> header;
  for (Eigen::Index k = 0; k < data.dim(); ++k) header.push_back("x" + std::to_string(k + 1));
  header.push_back("y");
  std::vector<std::vector<std::string>> rows;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    std::vector<std::string> row;
    for (Eigen::Index k = 0; k < data.dim(); ++k) row.push_back(format_double(data.inputs(i, k)));
    row.push_back(format_double(data.labels(i)));
    rows.push_back(std::move(row));
  }
  write_text_file(fs::path(cfg.output_dir) / "dataset.csv", table_to_csv(header, rows));
  std::vector<std::vector<std::string>> alpha;
  for (Eigen::Index k = 0; k < data.dim(); ++k)
    alpha.push_back({std::to_string(k + 1), format_double(data.teacher_direction(k))});
  write_text_file(fs::path(cfg.output_dir) / "teacher_direction.csv",
                  table_to_csv({"coordinate", "alpha"}, alpha));
}

// Per-iteration mean over traces of equal length; a field is kept only when
// every trace has it.
Trace mean_trace(const std::vector<const Trace*>& traces) {
  Trace out;
  if (traces.empty()) return out;
  const std::size_t len = traces.front()->size();
  for (std::size_t i = 0; i < len; ++i) {
    TraceRecord rec;
    rec.iteration = (*traces.front())[i].iteration;
    auto avg = [&](std::optional<double> TraceRecord::*f) -> std::optional<double> {
      double s = 0;
      for (const Trace* t : traces) {
        const auto& v = (*t)[i].*f;
        if (!v) return std::nullopt;
        s += *v;
      }
      return s / static_cast<double>(traces.size());
    };
    rec.risk = avg(&TraceRecord::risk);
    rec.entropy = avg(&TraceRecord::entropy);
    rec.total_objective = avg(&TraceRecord::total_objective);
    rec.w2_to_reference = avg(&TraceRecord::w2_to_reference);
    rec.beta_norm_sq = avg(&TraceRecord::beta_norm_sq);
    rec.inner_final_loss = avg(&TraceRecord::inner_final_loss);
    double wall = 0;
    for (const Trace* t : traces) wall += (*t)[i].wall_time_s;
    rec.wall_time_s = wall / static_cast<double>(traces.size());
    out.push_back(rec);
  }
  return out;
}

void write_histograms(const ExperimentConfig& cfg,
                      const std::vector<GaussianState<double>>& states) {
  const int last = cfg.gaussian.iterations;
  std::vector<int> shown{0};
  for (int n : {10, 20, 40})
    if (n < last) shown.push_back(n);
  shown.push_back(last);
  const double lo = cfg.gaussian.init.mean - 4 * cfg.gaussian.init.stddev;
  const double hi = cfg.gaussian.init.mean + 4 * cfg.gaussian.init.stddev;
  constexpr int kBins = 60;
  const double width = (hi - lo) / kBins;
  std::vector<std::vector<std::string>> rows;
  std::vector<Series> series;
  for (int n : shown) {
    SeededRng rng = SeededRng(cfg.histogram_seed).derive("histogram", static_cast<std::uint64_t>(n));
    const GaussianState<double>& g = states[n];
    std::vector<double> counts(kBins, 0.0);
    for (Eigen::Index k = 0; k < cfg.histogram_particles; ++k) {
      const double x = g.mean + g.stddev * rng.normal();
      const int b = static_cast<int>(std::floor((x - lo) / width));
      if (b >= 0 && b < kBins) counts[b] += 1;
    }
    Series s{"n = " + std::to_string(n), {}, {}, false};
    for (int b = 0; b < kBins; ++b) {
      const double center = lo + (b + 0.5) * width;
      const double density = counts[b] / (static_cast<double>(cfg.histogram_particles) * width);
      rows.push_back({std::to_string(n), format_double(center), format_double(density)});
      s.x.push_back(center);
      s.y.push_back(density);
    }
    series.push_back(std::move(s));
  }
  write_text_file(fs::path(cfg.output_dir) / "histogram.csv",
                  table_to_csv({"iter", "bin_center", "density"}, rows));
  Panel panel{"Particle histograms of rho_n (" + std::to_string(cfg.histogram_particles) +
                  " samples)",
              "theta", "density", false, std::move(series)};
  write_text_file(fs::path(cfg.output_dir) / "histogram.svg", render_svg({panel}));
}

std::optional<ParticleCloud> maybe_reference(const ExperimentConfig& cfg) {
  if (!cfg.use_reference) return std::nullopt;
  return compute_reference(cfg).cloud;
}

}  // namespace

int worker_count() {
  if (g_workers > 0) return g_workers;
  if (const char* env = std::getenv("WPROX_THREADS")) {
    if (const auto n = parse_integer<int>(env); n && *n > 0) return *n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void set_worker_count(int n) { g_workers = n; }

void parallel_for(int count, const std::function<void(int)>& fn) {
  const int workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

MfldRunConfig repetition_config(const ExperimentConfig& cfg, int r) {
  MfldRunConfig run = cfg.mfld;
  run.weight_seed = cfg.mfld.weight_seed + static_cast<std::uint64_t>(r);
  run.noise_seed = cfg.mfld.noise_seed + static_cast<std::uint64_t>(r);
  return run;
}

std::string reference_key(const ExperimentConfig& cfg) {
  const auto& m = cfg.mfld;
  const auto& ref = cfg.reference;
  const std::string text =
      "reference-v2;dim=" + std::to_string(m.dim) + ";samples=" + std::to_string(m.samples) +
      ";lambda=" + format_double(m.spec.lambda) + ";tau=" + format_double(m.spec.tau) +
      ";data_seed=" + std::to_string(m.data_seed) + ";weight_seed=" +
      std::to_string(m.weight_seed) + ";noise_seed=" + std::to_string(m.noise_seed) +
      ";xi=" + format_double(ref.step_xi) + ";m=" + std::to_string(ref.particles) +
      ";max_steps=" + std::to_string(ref.max_steps) + ";window=" + std::to_string(ref.window) +
      ";tol=" + format_double(ref.tol);
  return hex64(fnv1a64(text));
}

fs::path reference_path(const ExperimentConfig& cfg) {
  return fs::path(cfg.cache_dir) / ("reference_" + reference_key(cfg) + ".cloud");
}

ReferenceResult compute_reference(const ExperimentConfig& cfg) {
  const fs::path path = reference_path(cfg);
  const fs::path trace_path = fs::path(path).replace_extension(".csv");
  ReferenceResult out;
  if (fs::exists(path) && fs::exists(trace_path)) {
    out.cloud = load_cloud(path);
    out.from_cache = true;
    const Metadata meta = load_metadata(path);
    if (auto it = meta.find("steps"); it != meta.end()) out.steps = std::stol(it->second);
    if (auto it = meta.find("plateau_reached"); it != meta.end())
      out.plateau_reached = it->second == "true";
    if (auto it = meta.find("final_window_change"); it != meta.end())
      out.final_window_change = parse_double(it->second).value_or(0.0);
    out.trace = parse_trace_csv(read_text_file(trace_path));
    return out;
  }

  const MfldRunConfig& run = cfg.mfld;
  const ReferenceConfig& ref = cfg.reference;
  const Dataset<double> data = generate_teacher_dataset<double>(run.samples, run.dim, run.data_seed);
  SeededRng init_rng = SeededRng(run.weight_seed).derive("reference-init");
  SeededRng noise = SeededRng(run.noise_seed).derive("reference-noise");
  ParticleCloud cloud =
      sample_gaussian_cloud<double>(Eigen::VectorXd::Zero(run.dim), 1.0, ref.particles, init_rng);
  const double noise_scale = std::sqrt(2.0 * ref.step_xi * run.spec.tau);
  std::vector<double> history;
  history.reserve(ref.max_steps + 1);
  for (long k = 0;; ++k) {
    const RiskAndGradient<double> rg = risk_with_gradient(cloud, data, run.spec);
    history.push_back(rg.risk);
    if (k % ref.window == 0) {
      TraceRecord rec;
      rec.iteration = static_cast<int>(k);
      rec.risk = rg.risk;
      out.trace.push_back(rec);
    }
    // Window means: the risk of a noisy particle system fluctuates step to step.
    if (k + 1 >= 2 * ref.window) {
      const double* tail = history.data() + (k + 1 - 2 * ref.window);
      double previous = 0, last = 0;
      for (int i = 0; i < ref.window; ++i) {
        previous += tail[i];
        last += tail[ref.window + i];
      }
      out.final_window_change = std::abs(last - previous) / ref.window;
      if (out.final_window_change < ref.tol) {
        out.plateau_reached = true;
        out.steps = k;
        break;
      }
    }
    if (k == ref.max_steps) {
      out.steps = k;
      break;
    }
    cloud -= ref.step_xi * rg.gradient;
    if (noise_scale > 0) cloud += noise_scale * noise.normal_matrix(cloud.rows(), cloud.cols());
  }
  if (out.trace.empty() || out.trace.back().iteration != out.steps) {
    TraceRecord rec;
    rec.iteration = static_cast<int>(out.steps);
    rec.risk = history.back();
    out.trace.push_back(rec);
  }
  out.cloud = cloud;
  Metadata meta{{"reference_key", reference_key(cfg)},
                {"steps", std::to_string(out.steps)},
                {"plateau_reached", out.plateau_reached ? "true" : "false"},
                {"final_window_change", format_double(out.final_window_change)},
                {"data_seed", std::to_string(run.data_seed)},
                {"weight_seed", std::to_string(run.weight_seed)},
                {"noise_seed", std::to_string(run.noise_seed)}};
  // Trace first: the cloud file marks a complete cache entry.
  emit_trace_csv(out.trace, trace_path);
  save_cloud(path, cloud, meta);
  return out;
}

ReferenceResult run_reference(const ExperimentConfig& cfg) {
  validate(cfg);
  write_resolved(cfg);
  ReferenceResult ref = compute_reference(cfg);
  const fs::path dir(cfg.output_dir);
  emit_trace_csv(ref.trace, dir / "reference_trace.csv");
  save_cloud(dir / "reference.cloud", ref.cloud, load_metadata(reference_path(cfg)));
  return ref;
}

GaussianOutcome run_gaussian(const ExperimentConfig& cfg) {
  validate(cfg);
  write_resolved(cfg);
  std::vector<GaussianState<double>> states;
  GaussianOutcome out{run_gaussian_experiment(cfg.gaussian, &states)};
  const fs::path dir(cfg.output_dir);
  emit_trace_csv(out.trace, dir / "trace.csv");
  emit_plot_svg({{"proximal iterates", out.trace}}, PlotKind::kGaussian, dir / "plot.svg",
                {cfg.gaussian.step_xi, cfg.gaussian.mu});
  std::vector<std::vector<std::string>> rows;
  for (std::size_t n = 0; n < states.size(); ++n)
    rows.push_back({std::to_string(n), format_double(states[n].mean),
                    format_double(states[n].stddev)});
  write_text_file(dir / "states.csv", table_to_csv({"iter", "mean", "stddev"}, rows));
  write_histograms(cfg, states);
  return out;
}

std::vector<RunOutcome> run_mfld(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<std::string> algorithms;
  if (cfg.kind == ExperimentKind::kMfldProx) algorithms = {"prox"};
  else if (cfg.kind == ExperimentKind::kMfldGd) algorithms = {"gd"};
  else if (cfg.kind == ExperimentKind::kCompare) algorithms = {"prox", "gd"};
  else throw std::invalid_argument("run_mfld: unsupported kind " + to_string(cfg.kind));

  write_resolved(cfg);
  const fs::path dir(cfg.output_dir);
  const Dataset<double> data = teacher_dataset(cfg.mfld);
  write_dataset(cfg, data);
  const std::optional<ParticleCloud> reference = maybe_reference(cfg);

  const int reps = cfg.repetitions;
  const int tasks = reps * static_cast<int>(algorithms.size());
  std::vector<RunOutcome> outcomes(tasks);
  parallel_for(tasks, [&](int t) {
    const int r = t % reps;
    const std::string& algo = algorithms[t / reps];
    MfldRunConfig run = repetition_config(cfg, r);
    run.reference = reference;
    const ParticleCloud init = initial_cloud(run);
    RunOutcome& o = outcomes[t];
    o.algorithm = algo;
    o.repetition = r;
    o.trace = algo == "prox" ? run_proximal_training(run, data, init, &o.final_cloud)
                             : run_noisy_gd(run, data, init, &o.final_cloud);
  });

  std::vector<LabeledTrace> plotted;
  for (const std::string& algo : algorithms) {
    std::vector<const Trace*> group;
    for (const RunOutcome& o : outcomes) {
      if (o.algorithm != algo) continue;
      group.push_back(&o.trace);
      const fs::path run_dir = dir / algo / ("rep" + std::to_string(o.repetition));
      const MfldRunConfig run = repetition_config(cfg, o.repetition);
      emit_trace_csv(o.trace, run_dir / "trace.csv");
      save_cloud(run_dir / "initial.cloud", initial_cloud(run), run_metadata(cfg, run));
      save_cloud(run_dir / "final.cloud", o.final_cloud, run_metadata(cfg, run));
    }
    Trace mean = mean_trace(group);
    emit_trace_csv(mean, dir / (algo + "_mean.csv"));
    plotted.push_back({(algo == "prox" ? std::string("proximal") : std::string("noisy GD")) +
                           " (mean of " + std::to_string(group.size()) + ")",
                       std::move(mean)});
  }
  emit_plot_svg(plotted, PlotKind::kMfld, dir / "plot.svg");

  if (cfg.kind == ExperimentKind::kCompare && reference) {
    std::vector<std::vector<std::string>> rows;
    for (int r = 0; r < reps; ++r) {
      const RateFit p = early_phase_fit(w2_sq_series(outcomes[r].trace));
      const RateFit g = early_phase_fit(w2_sq_series(outcomes[reps + r].trace));
      rows.push_back({std::to_string(r), format_double(p.factor), format_double(g.factor),
                      format_double(p.floor), format_double(g.floor), std::to_string(p.last),
                      std::to_string(g.last)});
    }
    write_text_file(dir / "summary.csv",
                    table_to_csv({"rep", "prox_factor", "gd_factor", "prox_floor", "gd_floor",
                                  "prox_window_end", "gd_window_end"},
                                 rows));
  }
  return outcomes;
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  write_resolved(cfg);
  const fs::path dir(cfg.output_dir);
  const Dataset<double> data = teacher_dataset(cfg.mfld);
  const ParticleCloud reference = compute_reference(cfg).cloud;
  const int reps = cfg.repetitions;
  const int sizes = static_cast<int>(cfg.sweep_particles.size());
  const std::vector<std::string> algorithms{"prox", "gd"};
  const int tasks = sizes * reps * 2;
  std::vector<SweepPoint> points(tasks);
  parallel_for(tasks, [&](int t) {
    const int algo = t / (sizes * reps);
    const int s = (t / reps) % sizes;
    const int r = t % reps;
    MfldRunConfig run = repetition_config(cfg, r);
    run.particles = cfg.sweep_particles[s];
    run.reference.reset();
    const ParticleCloud init = initial_cloud(run);
    ParticleCloud final_cloud;
    if (algo == 0)
      run_proximal_training(run, data, init, &final_cloud);
    else
      run_noisy_gd(run, data, init, &final_cloud);
    points[t] = {algorithms[algo], run.particles, r, w2_discrete(final_cloud, reference)};
  });

  std::vector<std::vector<std::string>> rows, mean_rows;
  std::vector<Series> series;
  for (int a = 0; a < 2; ++a) {
    Series s{algorithms[a] == "prox" ? "proximal (mean)" : "noisy GD (mean)", {}, {}, false};
    for (int i = 0; i < sizes; ++i) {
      double sum = 0, sq = 0;
      for (int r = 0; r < reps; ++r) {
        const SweepPoint& p = points[(a * sizes + i) * reps + r];
        rows.push_back({p.algorithm, std::to_string(p.particles), std::to_string(p.repetition),
                        format_double(p.final_w2)});
        sum += p.final_w2;
        sq += p.final_w2 * p.final_w2;
      }
      const double mean = sum / reps;
      const double sd = reps > 1 ? std::sqrt(std::max(0.0, (sq - reps * mean * mean) / (reps - 1))) : 0.0;
      mean_rows.push_back({algorithms[a], std::to_string(cfg.sweep_particles[i]),
                           format_double(mean), format_double(sd)});
      s.x.push_back(static_cast<double>(cfg.sweep_particles[i]));
      s.y.push_back(mean);
    }
    series.push_back(std::move(s));
  }
  write_text_file(dir / "sweep.csv",
                  table_to_csv({"algorithm", "particles", "rep", "final_w2_to_reference"}, rows));
  write_text_file(dir / "sweep_mean.csv",
                  table_to_csv({"algorithm", "particles", "mean_final_w2", "std_final_w2"}, mean_rows));
  Panel panel{"Final W2 to reference vs particle count", "particles m", "W2", true,
              std::move(series)};
  write_text_file(dir / "sweep.svg", render_svg({panel}));
  return points;
}

}  // namespace wprox::harness
