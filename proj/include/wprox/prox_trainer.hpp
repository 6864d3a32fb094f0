#ifndef WPROX_PROX_TRAINER_HPP_
#define WPROX_PROX_TRAINER_HPP_

#include <cstdint>
#include <optional>

#include "wprox/common.hpp"
#include "wprox/objectives.hpp"
#include "wprox/rng.hpp"
#include "wprox/trace.hpp"
#include "wprox/transport_flow.hpp"

namespace wprox {

/// Settings of the per-step transport-map fit.
struct InnerFitConfig {
  double lr = 0.005;
  int iters = 150;
  int blocks = 2;
  Eigen::Index hidden = 100;
  double init_scale = 0.1;
  Eigen::Index batch = 0;  // 0 = full batch
};

struct MfldRunConfig {
  MfldSpec<double> spec{0.1, 0.1};
  double step_xi = 0.2;
  int outer_iterations = 40;
  InnerFitConfig inner;
  Eigen::Index particles = 100;
  Eigen::Index samples = 1000;
  Eigen::Index dim = 2;
  std::uint64_t data_seed = 0;
  std::uint64_t weight_seed = 1;
  std::uint64_t noise_seed = 2;
  std::optional<ParticleCloud> reference;
  double score_bandwidth = 0.5;
  bool track_entropy = true;
  bool track_beta = false;
};

void require_valid(const MfldRunConfig& cfg);

/// Standard Gaussian initial weights drawn from the weight seed.
ParticleCloud initial_cloud(const MfldRunConfig& cfg);
Dataset<double> teacher_dataset(const MfldRunConfig& cfg);

/// Risk, entropy estimate, F_tau and (if a reference is set) W2 to it.
TraceRecord diagnose(const ParticleCloud& cloud, const Dataset<double>& data,
                     const MfldRunConfig& cfg);

struct ProxStepResult {
  ParticleCloud next;
  FlowParams flow;
  TraceRecord record;
};

/// One inexact proximal step: fit T from the identity by sgd_fit, then push
/// every particle through T.
ProxStepResult prox_step(const ParticleCloud& cloud, const Dataset<double>& data,
                         const MfldRunConfig& cfg, SeededRng& rng);

Trace run_proximal_training(const MfldRunConfig& cfg, const Dataset<double>& data,
                            const ParticleCloud& init, ParticleCloud* final_cloud = nullptr);
Trace run_proximal_training(const MfldRunConfig& cfg);

/// theta_j <- theta_j - xi grad(dR/drho)(theta_j) + sqrt(2 xi tau) z_j.
ParticleCloud noisy_gd_step(const ParticleCloud& cloud, const Dataset<double>& data,
                            const MfldSpec<double>& spec, double xi, SeededRng& rng);

Trace run_noisy_gd(const MfldRunConfig& cfg, const Dataset<double>& data,
                   const ParticleCloud& init, ParticleCloud* final_cloud = nullptr);
Trace run_noisy_gd(const MfldRunConfig& cfg);

/// Empirical |beta|^2 in L2(rho_next), with
///   beta = (T^{-1} - id) / xi - [grad(dR/drho) + tau * kernel score]
/// evaluated at the particles of `next`.
double inexact_error(const FlowParams& flow, const ParticleCloud& prev, const ParticleCloud& next,
                     const Dataset<double>& data, const MfldSpec<double>& spec, double xi,
                     double bandwidth);

}  // namespace wprox

#endif  // WPROX_PROX_TRAINER_HPP_
