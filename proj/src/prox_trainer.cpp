#include "wprox/prox_trainer.hpp"

#include <chrono>
#include <cmath>

#include "wprox/estimators.hpp"
#include "wprox/measures.hpp"

namespace wprox {
namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void require_valid(const MfldRunConfig& cfg) {
  require_valid(cfg.spec);
  require(cfg.step_xi > 0, "MfldRunConfig: step_xi must be > 0");
  require(cfg.outer_iterations >= 0, "MfldRunConfig: outer_iterations must be >= 0");
  require(cfg.inner.lr > 0, "MfldRunConfig: inner lr must be > 0");
  require(cfg.inner.iters >= 1, "MfldRunConfig: inner iters must be >= 1");
  require(cfg.inner.blocks >= 1, "MfldRunConfig: flow blocks must be >= 1");
  require(cfg.inner.hidden >= 1, "MfldRunConfig: flow hidden width must be >= 1");
  require(cfg.inner.init_scale >= 0, "MfldRunConfig: flow init scale must be >= 0");
  require(cfg.inner.batch >= 0, "MfldRunConfig: inner batch must be >= 0");
  require(cfg.particles >= 2, "MfldRunConfig: particles must be >= 2");
  require(cfg.samples >= 1, "MfldRunConfig: samples must be >= 1");
  require(cfg.dim >= 1, "MfldRunConfig: dim must be >= 1");
  require(cfg.score_bandwidth > 0, "MfldRunConfig: score bandwidth must be > 0");
  if (cfg.reference) {
    require(cfg.reference->cols() == cfg.dim, "MfldRunConfig: reference dimension mismatch");
  }
}

ParticleCloud initial_cloud(const MfldRunConfig& cfg) {
  SeededRng rng = SeededRng(cfg.weight_seed).derive("init-weights");
  return sample_gaussian_cloud<double>(Eigen::VectorXd::Zero(cfg.dim), 1.0, cfg.particles, rng);
}

Dataset<double> teacher_dataset(const MfldRunConfig& cfg) {
  return generate_teacher_dataset<double>(cfg.samples, cfg.dim, cfg.data_seed);
}

TraceRecord diagnose(const ParticleCloud& cloud, const Dataset<double>& data,
                     const MfldRunConfig& cfg) {
  TraceRecord rec;
  const double r = risk(cloud, data, cfg.spec);
  rec.risk = r;
  if (cfg.track_entropy) {
    const double h = kl_entropy_estimate(cloud);
    rec.entropy = h;
    rec.total_objective = r + cfg.spec.tau * h;
  }
  if (cfg.reference) rec.w2_to_reference = w2_discrete(cloud, *cfg.reference);
  return rec;
}

ProxStepResult prox_step(const ParticleCloud& cloud, const Dataset<double>& data,
                         const MfldRunConfig& cfg, SeededRng& rng) {
  require_valid(cfg);
  detail::require_matching(cloud, data);
  SeededRng init_rng = rng.derive("flow-init");
  SeededRng batch_rng = rng.derive("minibatch");
  FlowParams start = init_near_identity(cloud.cols(), cfg.inner.blocks, cfg.inner.hidden,
                                        cfg.inner.init_scale, init_rng);
  FitResult fit = sgd_fit(std::move(start), cloud, data, cfg.spec, cfg.step_xi, cfg.inner.lr,
                          cfg.inner.iters, cfg.inner.batch, &batch_rng);
  ProxStepResult out;
  out.next = flow_forward(fit.params, cloud).images;
  out.record = diagnose(out.next, data, cfg);
  out.record.inner_final_loss = fit.final_loss;
  if (cfg.track_beta) {
    out.record.beta_norm_sq = inexact_error(fit.params, cloud, out.next, data, cfg.spec,
                                            cfg.step_xi, cfg.score_bandwidth);
  }
  out.flow = std::move(fit.params);
  return out;
}

Trace run_proximal_training(const MfldRunConfig& cfg, const Dataset<double>& data,
                            const ParticleCloud& init, ParticleCloud* final_cloud) {
  require_valid(cfg);
  const auto start = std::chrono::steady_clock::now();
  const SeededRng stream = SeededRng(cfg.noise_seed).derive("prox");
  Trace trace;
  ParticleCloud cloud = init;
  TraceRecord first = diagnose(cloud, data, cfg);
  first.wall_time_s = seconds_since(start);
  trace.push_back(first);
  for (int n = 1; n <= cfg.outer_iterations; ++n) {
    SeededRng step_rng = stream.derive("step", static_cast<std::uint64_t>(n));
    ProxStepResult step = prox_step(cloud, data, cfg, step_rng);
    cloud = std::move(step.next);
    step.record.iteration = n;
    step.record.wall_time_s = seconds_since(start);
    trace.push_back(step.record);
  }
  if (final_cloud) *final_cloud = std::move(cloud);
  return trace;
}

Trace run_proximal_training(const MfldRunConfig& cfg) {
  require_valid(cfg);
  return run_proximal_training(cfg, teacher_dataset(cfg), initial_cloud(cfg));
}

ParticleCloud noisy_gd_step(const ParticleCloud& cloud, const Dataset<double>& data,
                            const MfldSpec<double>& spec, double xi, SeededRng& rng) {
  require(xi > 0 && std::isfinite(xi), "noisy_gd_step: xi must be > 0");
  ParticleCloud next = cloud - xi * risk_particle_gradient(cloud, data, spec);
  if (spec.tau > 0) {
    next += std::sqrt(2.0 * xi * spec.tau) * rng.normal_matrix(cloud.rows(), cloud.cols());
  }
  return next;
}

Trace run_noisy_gd(const MfldRunConfig& cfg, const Dataset<double>& data,
                   const ParticleCloud& init, ParticleCloud* final_cloud) {
  require_valid(cfg);
  const auto start = std::chrono::steady_clock::now();
  SeededRng rng = SeededRng(cfg.noise_seed).derive("noisy-gd");
  Trace trace;
  ParticleCloud cloud = init;
  TraceRecord first = diagnose(cloud, data, cfg);
  first.wall_time_s = seconds_since(start);
  trace.push_back(first);
  for (int n = 1; n <= cfg.outer_iterations; ++n) {
    cloud = noisy_gd_step(cloud, data, cfg.spec, cfg.step_xi, rng);
    TraceRecord rec = diagnose(cloud, data, cfg);
    rec.iteration = n;
    rec.wall_time_s = seconds_since(start);
    trace.push_back(rec);
  }
  if (final_cloud) *final_cloud = std::move(cloud);
  return trace;
}

Trace run_noisy_gd(const MfldRunConfig& cfg) {
  require_valid(cfg);
  return run_noisy_gd(cfg, teacher_dataset(cfg), initial_cloud(cfg));
}

double inexact_error(const FlowParams& flow, const ParticleCloud& prev, const ParticleCloud& next,
                     const Dataset<double>& data, const MfldSpec<double>& spec, double xi,
                     double bandwidth) {
  require(xi > 0, "inexact_error: xi must be > 0");
  require(bandwidth > 0, "inexact_error: bandwidth must be > 0");
  require(prev.rows() == next.rows() && prev.cols() == next.cols(),
          "inexact_error: prev/next shape mismatch");
  detail::require_matching(next, data);
  const ParticleCloud back = flow_inverse(flow, next);
  ParticleCloud beta = (back - next) / xi - risk_particle_gradient(next, data, spec);
  if (spec.tau > 0) beta -= spec.tau * kernel_score(next, bandwidth);
  return beta.rowwise().squaredNorm().mean();
}

}  // namespace wprox
