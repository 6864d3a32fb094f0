#ifndef WPROX_HARNESS_EXPERIMENTS_HPP_
#define WPROX_HARNESS_EXPERIMENTS_HPP_

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "wprox/harness/config.hpp"
#include "wprox/harness/persistence.hpp"
#include "wprox/trace.hpp"

namespace wprox::harness {

/// Worker count: WPROX_THREADS if set and positive, else the hardware count.
int worker_count();
void set_worker_count(int n);

/// Runs fn(0..count-1) on up to worker_count() threads; results keep index order.
void parallel_for(int count, const std::function<void(int)>& fn);

/// Hex digest identifying everything that determines the reference cloud.
std::string reference_key(const ExperimentConfig& cfg);
std::filesystem::path reference_path(const ExperimentConfig& cfg);

struct ReferenceResult {
  ParticleCloud cloud;
  bool from_cache = false;
  long steps = 0;
  bool plateau_reached = false;
  double final_window_change = 0.0;
  Trace trace;  // risk every `window` steps
};

/// Noisy GD with the reference step and particle count, stopped after
/// max_steps or once the mean risk of the last `window` steps differs from
/// that of the window before by less than tol. Cached under cache_dir.
ReferenceResult compute_reference(const ExperimentConfig& cfg);

struct GaussianOutcome {
  Trace trace;
};

struct RunOutcome {
  std::string algorithm;  // "prox" or "gd"
  int repetition = 0;
  Trace trace;
  ParticleCloud final_cloud;
};

struct SweepPoint {
  std::string algorithm;
  Eigen::Index particles = 0;
  int repetition = 0;
  double final_w2 = 0.0;
};

/// Each runner writes resolved_config.toml plus its CSV/SVG/cloud outputs
/// under cfg.output_dir.
GaussianOutcome run_gaussian(const ExperimentConfig& cfg);
std::vector<RunOutcome> run_mfld(const ExperimentConfig& cfg);  // mfld-prox, mfld-gd, compare
std::vector<SweepPoint> run_sweep(const ExperimentConfig& cfg);
ReferenceResult run_reference(const ExperimentConfig& cfg);

/// Weight and noise seeds of repetition r.
MfldRunConfig repetition_config(const ExperimentConfig& cfg, int r);

}  // namespace wprox::harness

#endif  // WPROX_HARNESS_EXPERIMENTS_HPP_
