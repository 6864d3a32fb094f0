#ifndef WPROX_OBJECTIVES_HPP_
#define WPROX_OBJECTIVES_HPP_

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "wprox/common.hpp"
#include "wprox/measures.hpp"
#include "wprox/rng.hpp"

namespace wprox {

/// Teacher-generated regression data. inputs is N x d, one sample per row.
template <typename Scalar>
struct Dataset {
  Cloud<Scalar> inputs;
  Vec<Scalar> labels;
  Vec<Scalar> teacher_direction;

  Eigen::Index size() const { return inputs.rows(); }
  Eigen::Index dim() const { return inputs.cols(); }
};

/// L2 coefficient and temperature of F_tau = R + tau * int rho log rho.
template <typename Scalar>
struct MfldSpec {
  Scalar lambda{0.1};
  Scalar tau{0.1};
};

template <typename Scalar>
void require_valid(const MfldSpec<Scalar>& spec) {
  require(spec.lambda >= 0 && std::isfinite(spec.lambda), "MfldSpec: lambda must be >= 0");
  require(spec.tau >= 0 && std::isfinite(spec.tau), "MfldSpec: tau must be >= 0");
}

namespace detail {

// tanh via exp so the array path vectorizes; |error| stays at the ulp level of 1.
template <typename Derived>
auto fast_tanh(const Eigen::ArrayBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  return Scalar(1) - Scalar(2) / ((Scalar(2) * a).exp() + Scalar(1));
}

template <typename Scalar>
void require_matching(const Cloud<Scalar>& cloud, const Dataset<Scalar>& data) {
  require_valid_cloud(cloud);
  require(data.size() >= 1, "Dataset: N must be >= 1");
  require(data.labels.size() == data.size(), "Dataset: label count mismatch");
  require(cloud.cols() == data.dim(), "dimension mismatch: cloud d=" +
                                          std::to_string(cloud.cols()) +
                                          ", data d=" + std::to_string(data.dim()));
}

}  // namespace detail

/// Teacher model y = sin(alpha^T x) with alpha, x ~ N(0, I_d). alpha is drawn first.
template <typename Scalar = double>
Dataset<Scalar> generate_teacher_dataset(Eigen::Index samples, Eigen::Index dim,
                                         std::uint64_t seed) {
  require(samples >= 1 && dim >= 1, "generate_teacher_dataset: need N >= 1 and d >= 1");
  SeededRng rng = SeededRng(seed).derive("teacher-data");
  Dataset<Scalar> out;
  out.teacher_direction = rng.normal_matrix<Scalar>(dim, 1);
  out.inputs = rng.normal_matrix<Scalar>(samples, dim);
  out.labels = (out.inputs * out.teacher_direction).array().sin().matrix();
  return out;
}

/// f(x) = (1/m) sum_j tanh(theta_j^T x).
template <typename Scalar>
Scalar nn_predict(const Cloud<Scalar>& cloud, const Vec<Scalar>& x) {
  require_valid_cloud(cloud);
  require(cloud.cols() == x.size(), "nn_predict: dimension mismatch");
  return (cloud * x).array().tanh().mean();
}

/// Predictions at every data input, N-vector.
template <typename Scalar>
Vec<Scalar> nn_predict_all(const Cloud<Scalar>& cloud, const Dataset<Scalar>& data) {
  detail::require_matching(cloud, data);
  const Cloud<Scalar> act = detail::fast_tanh((data.inputs * cloud.transpose()).array()).matrix();
  return act.rowwise().mean();
}

/// R = (1/N) sum_i (f(x_i) - y_i)^2 / 2 + (lambda/m) sum_j |theta_j|^2.
template <typename Scalar>
Scalar risk(const Cloud<Scalar>& cloud, const Dataset<Scalar>& data, const MfldSpec<Scalar>& spec) {
  require_valid(spec);
  const Vec<Scalar> residual = nn_predict_all(cloud, data) - data.labels;
  return Scalar(0.5) * residual.squaredNorm() / static_cast<Scalar>(data.size()) +
         spec.lambda * cloud.rowwise().squaredNorm().mean();
}

template <typename Scalar>
struct RiskAndGradient {
  Scalar risk;
  Cloud<Scalar> gradient;  // m x d, row j = grad (dR/drho)(theta_j)
};

/// Risk and the particle Wasserstein gradient in one pass over the data.
template <typename Scalar>
RiskAndGradient<Scalar> risk_with_gradient(const Cloud<Scalar>& cloud,
                                           const Dataset<Scalar>& data,
                                           const MfldSpec<Scalar>& spec) {
  require_valid(spec);
  detail::require_matching(cloud, data);
  const auto n = static_cast<Scalar>(data.size());
  // act(i, j) = tanh(theta_j^T x_i)
  Cloud<Scalar> act = detail::fast_tanh((data.inputs * cloud.transpose()).array()).matrix();
  const Vec<Scalar> residual = act.rowwise().mean() - data.labels;
  RiskAndGradient<Scalar> out;
  out.risk = Scalar(0.5) * residual.squaredNorm() / n +
             spec.lambda * cloud.rowwise().squaredNorm().mean();
  // weight(i, j) = l'(f_i, y_i) * (1 - tanh^2) / N
  act = ((Scalar(1) - act.array().square()).colwise() * (residual.array() / n)).matrix();
  out.gradient = act.transpose() * data.inputs + Scalar(2) * spec.lambda * cloud;
  return out;
}

/// grad (dR/drho)(rho^m)(theta_j)
///   = (1/N) sum_i (f(x_i) - y_i)(1 - tanh^2(theta_j^T x_i)) x_i + 2 lambda theta_j.
template <typename Scalar>
Cloud<Scalar> risk_particle_gradient(const Cloud<Scalar>& cloud, const Dataset<Scalar>& data,
                                     const MfldSpec<Scalar>& spec) {
  return risk_with_gradient(cloud, data, spec).gradient;
}

/// F_tau = R + tau * neg_entropy, where neg_entropy estimates int rho log rho.
template <typename Scalar>
Scalar total_objective(const Cloud<Scalar>& cloud, const Dataset<Scalar>& data,
                       const MfldSpec<Scalar>& spec, Scalar neg_entropy) {
  require(std::isfinite(neg_entropy), "total_objective: entropy must be finite");
  return risk(cloud, data, spec) + spec.tau * neg_entropy;
}

// KL, Fisher information and the PL slack against nu = N(0, 1).

/// KL(N(m, s^2) || N(0, 1)) = (m^2 + s^2 - 1 - 2 ln s) / 2.
template <typename Scalar>
Scalar kl_gaussian(const GaussianState<Scalar>& a) {
  require_valid(a);
  return Scalar(0.5) * (a.mean * a.mean + a.stddev * a.stddev - Scalar(1) -
                        Scalar(2) * std::log(a.stddev));
}

/// J(rho || nu): grad log(rho/nu)(m + s z) = m + z (s - 1/s), so J = m^2 + (s - 1/s)^2.
template <typename Scalar>
Scalar relative_fisher_gaussian(const GaussianState<Scalar>& a) {
  require_valid(a);
  const Scalar spread = a.stddev - Scalar(1) / a.stddev;
  return a.mean * a.mean + spread * spread;
}

/// J - 2 mu KL. Nonnegative for every Gaussian when mu = 1 (log-Sobolev for N(0,1)).
template <typename Scalar>
Scalar pl_residual(const GaussianState<Scalar>& a, Scalar mu) {
  require(mu > 0, "pl_residual: mu must be > 0");
  return relative_fisher_gaussian(a) - Scalar(2) * mu * kl_gaussian(a);
}

}  // namespace wprox

#endif  // WPROX_OBJECTIVES_HPP_
