#ifndef WPROX_TRANSPORT_FLOW_HPP_
#define WPROX_TRANSPORT_FLOW_HPP_

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "wprox/common.hpp"
#include "wprox/objectives.hpp"
#include "wprox/rng.hpp"

namespace wprox {

/// One hidden layer: out = w2 * softplus(w1 * in + b1) + b2.
struct SmoothMlp {
  Eigen::MatrixXd w1;  // hidden x in
  Eigen::VectorXd b1;  // hidden
  Eigen::MatrixXd w2;  // out x hidden
  Eigen::VectorXd b2;  // out
};

/// Affine coupling block. Coordinates [pass_offset, pass_offset + pass_size)
/// are copied; the complementary contiguous range is scaled by exp(s(pass))
/// and shifted by t(pass).
struct CouplingBlock {
  bool parity = false;
  Eigen::Index pass_offset = 0;
  Eigen::Index pass_size = 0;
  Eigen::Index trans_offset = 0;
  Eigen::Index trans_size = 0;
  SmoothMlp scale;
  SmoothMlp shift;
};

/// Composition of coupling blocks with alternating parity; the learned map T.
struct FlowParams {
  Eigen::Index dim = 0;
  std::vector<CouplingBlock> blocks;

  Eigen::Index parameter_count() const;
  bool all_finite() const;
};

/// Same shape as FlowParams, one entry per parameter.
using FlowGradient = FlowParams;

/// Thrown when an inner fit produces a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hidden weights ~ N(0, scale^2 / fan_in); output layers and all biases are
/// zero, so the map is exactly the identity with zero log-determinant.
/// Block k passes the first floor(d/2) coordinates when k is even and the
/// remaining ones when k is odd.
FlowParams init_near_identity(Eigen::Index dim, int blocks, Eigen::Index hidden, double scale,
                              SeededRng& rng);

struct FlowImage {
  Eigen::VectorXd image;
  double logdet;
};

struct FlowBatchImage {
  ParticleCloud images;     // m x d
  Eigen::VectorXd logdets;  // m
};

FlowImage flow_forward(const FlowParams& params, const Eigen::VectorXd& theta);
FlowBatchImage flow_forward(const FlowParams& params, const ParticleCloud& thetas);

Eigen::VectorXd flow_inverse(const FlowParams& params, const Eigen::VectorXd& alpha);
ParticleCloud flow_inverse(const FlowParams& params, const ParticleCloud& alphas);

/// Inner proximal objective for the mean-field network:
///   (1/N) sum_i l(f_T(x_i), y_i) + (lambda/m) sum_j |T(theta_j)|^2
///   - (tau/m) sum_j log|det grad T(theta_j)| + (1/(2 m xi)) sum_j |T(theta_j) - theta_j|^2
/// where f_T averages tanh(T(theta_j)^T x) over particles.
double flow_loss(const FlowParams& params, const ParticleCloud& cloud, const Dataset<double>& data,
                 const MfldSpec<double>& spec, double xi);

struct FlowLossAndGradient {
  double loss;
  FlowGradient gradient;
};

/// Exact reverse-mode gradient of flow_loss.
FlowLossAndGradient flow_loss_gradient(const FlowParams& params, const ParticleCloud& cloud,
                                       const Dataset<double>& data, const MfldSpec<double>& spec,
                                       double xi);

/// params += a * direction
void axpy(FlowParams& params, double a, const FlowGradient& direction);

/// Flattened view used by tests and diagnostics. Order: blocks, then scale
/// (w1, b1, w2, b2), then shift, each column-major.
Eigen::VectorXd to_vector(const FlowParams& params);
void assign_from_vector(FlowParams& params, const Eigen::VectorXd& flat);

struct FitResult {
  FlowParams params;
  double final_loss;
  std::vector<double> loss_trace;  // loss before each update, then final_loss
};

/// Plain gradient descent, params <- params - lr * grad. batch == 0 uses every
/// data sample; otherwise each step draws `batch` samples with replacement
/// from `rng`. Throws DivergenceError on a non-finite loss.
FitResult sgd_fit(FlowParams params, const ParticleCloud& cloud, const Dataset<double>& data,
                  const MfldSpec<double>& spec, double xi, double lr, int iters,
                  Eigen::Index batch = 0, SeededRng* rng = nullptr);

}  // namespace wprox

#endif  // WPROX_TRANSPORT_FLOW_HPP_
