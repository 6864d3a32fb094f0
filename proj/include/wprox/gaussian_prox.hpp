#ifndef WPROX_GAUSSIAN_PROX_HPP_
#define WPROX_GAUSSIAN_PROX_HPP_

#include <chrono>
#include <cmath>
#include <utility>

#include "wprox/common.hpp"
#include "wprox/measures.hpp"
#include "wprox/objectives.hpp"
#include "wprox/trace.hpp"

namespace wprox {

// Exact Wasserstein proximal steps for F = KL(. || N(0,1)) on 1-D Gaussians.
// For a Gaussian start the minimizer over all laws is Gaussian, so working in
// the (mean, stddev) family is exact.

template <typename Scalar>
struct GaussianProxConfig {
  GaussianState<Scalar> init = GaussianState<Scalar>::from_variance(0, 100);
  Scalar step_xi{0.1};
  int iterations = 60;
  Scalar mu{1};
};

template <typename Scalar>
void require_valid(const GaussianProxConfig<Scalar>& cfg) {
  require_valid(cfg.init);
  require(cfg.step_xi > 0, "GaussianProxConfig: step_xi must be > 0");
  require(cfg.iterations >= 1, "GaussianProxConfig: iterations must be >= 1");
  require(cfg.mu > 0, "GaussianProxConfig: mu must be > 0");
}

/// argmin_q KL(q || N(0,1)) + W2^2(q, rho) / (2 xi).
/// mean' = mean / (1 + xi); stddev' is the positive root of
/// (1 + xi) s^2 - stddev s - xi = 0.
template <typename Scalar>
GaussianState<Scalar> prox_kl_gaussian(const GaussianState<Scalar>& rho, Scalar xi) {
  require_valid(rho);
  require(xi > 0 && std::isfinite(xi), "prox_kl_gaussian: xi must be > 0");
  const Scalar a = Scalar(1) + xi;
  const Scalar s = rho.stddev;
  // Positive root; the other root is negative since the product of roots is -xi/a.
  return {rho.mean / a, (s + std::sqrt(s * s + Scalar(4) * xi * a)) / (Scalar(2) * a)};
}

/// Moreau-Yosida envelope u(rho, xi) = F(rho_xi) + W2^2(rho_xi, rho) / (2 xi).
template <typename Scalar>
Scalar hopf_lax_value(const GaussianState<Scalar>& rho, Scalar xi) {
  const GaussianState<Scalar> next = prox_kl_gaussian(rho, xi);
  const Scalar w = w2_gaussian_1d(next, rho);
  return kl_gaussian(next) + w * w / (Scalar(2) * xi);
}

template <typename Scalar>
struct HopfLaxCheck {
  Scalar lhs;  // central difference of u in xi
  Scalar rhs;  // -W2^2(rho_xi, rho) / (2 xi^2)
};

template <typename Scalar>
HopfLaxCheck<Scalar> hopf_lax_derivative_check(const GaussianState<Scalar>& rho, Scalar xi,
                                                Scalar h) {
  require(h > 0 && h < xi, "hopf_lax_derivative_check: need 0 < h < xi");
  const Scalar lhs = (hopf_lax_value(rho, xi + h) - hopf_lax_value(rho, xi - h)) / (Scalar(2) * h);
  const Scalar w = w2_gaussian_1d(prox_kl_gaussian(rho, xi), rho);
  return {lhs, -w * w / (Scalar(2) * xi * xi)};
}

/// Iterates the exact prox from cfg.init. Record n holds KL(rho_n), W2(rho_n, nu)
/// and, for n >= 1, KL_n / KL_{n-1} (left empty when KL_{n-1} is zero).
template <typename Scalar>
Trace run_gaussian_experiment(const GaussianProxConfig<Scalar>& cfg,
                              std::vector<GaussianState<Scalar>>* states = nullptr) {
  require_valid(cfg);
  const auto start = std::chrono::steady_clock::now();
  const GaussianState<Scalar> target{0, 1};
  Trace trace;
  trace.reserve(cfg.iterations + 1);
  GaussianState<Scalar> rho = cfg.init;
  for (int n = 0; n <= cfg.iterations; ++n) {
    if (n > 0) rho = prox_kl_gaussian(rho, cfg.step_xi);
    if (states) states->push_back(rho);
    TraceRecord rec;
    rec.iteration = n;
    rec.kl = static_cast<double>(kl_gaussian(rho));
    rec.w2_to_reference = static_cast<double>(w2_gaussian_1d(rho, target));
    if (n > 0 && *trace.back().kl > 0) rec.contraction_ratio = *rec.kl / *trace.back().kl;
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    trace.push_back(rec);
  }
  return trace;
}

}  // namespace wprox

#endif  // WPROX_GAUSSIAN_PROX_HPP_
