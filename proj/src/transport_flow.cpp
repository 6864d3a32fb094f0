#include "wprox/transport_flow.hpp"

#include <cmath>
#include <string>

namespace wprox {
namespace {

Eigen::ArrayXXd softplus(const Eigen::ArrayXXd& z) {
  return z.cwiseMax(0.0) + (-z.abs()).exp().log1p();
}

Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& z) { return 1.0 / (1.0 + (-z).exp()); }

SmoothMlp make_mlp(Eigen::Index in, Eigen::Index hidden, Eigen::Index out, double scale,
                   SeededRng& rng) {
  SmoothMlp net;
  const double std_dev = in > 0 ? scale / std::sqrt(static_cast<double>(in)) : 0.0;
  net.w1 = rng.normal_matrix(hidden, in) * std_dev;
  net.b1 = Eigen::VectorXd::Zero(hidden);
  net.w2 = Eigen::MatrixXd::Zero(out, hidden);
  net.b2 = Eigen::VectorXd::Zero(out);
  return net;
}

struct MlpCache {
  Eigen::ArrayXXd pre;     // m x hidden
  Eigen::MatrixXd hidden;  // m x hidden
};

Eigen::MatrixXd mlp_forward(const SmoothMlp& net, const Eigen::MatrixXd& in, MlpCache* cache) {
  Eigen::ArrayXXd pre = ((in * net.w1.transpose()).rowwise() + net.b1.transpose()).array();
  Eigen::MatrixXd hidden = softplus(pre).matrix();
  Eigen::MatrixXd out = (hidden * net.w2.transpose()).rowwise() + net.b2.transpose();
  if (cache) {
    cache->pre = std::move(pre);
    cache->hidden = std::move(hidden);
  }
  return out;
}

// Accumulates parameter gradients into `grad`; returns the gradient w.r.t. the input.
Eigen::MatrixXd mlp_backward(const SmoothMlp& net, const Eigen::MatrixXd& in,
                             const MlpCache& cache, const Eigen::MatrixXd& g_out,
                             SmoothMlp& grad) {
  grad.w2 += g_out.transpose() * cache.hidden;
  grad.b2 += g_out.colwise().sum().transpose();
  const Eigen::MatrixXd g_pre =
      ((g_out * net.w2).array() * sigmoid(cache.pre)).matrix();
  grad.w1 += g_pre.transpose() * in;
  grad.b1 += g_pre.colwise().sum().transpose();
  return g_pre * net.w1;
}

struct BlockCache {
  Eigen::MatrixXd input;  // m x d
  Eigen::MatrixXd pass;   // m x pass_size
  MlpCache scale, shift;
  Eigen::ArrayXXd exp_s;  // m x trans_size
};

void require_dims(const FlowParams& params, Eigen::Index d, const char* who) {
  require(params.dim == d, std::string(who) + ": dimension mismatch (flow d=" +
                               std::to_string(params.dim) + ", point d=" + std::to_string(d) +
                               ")");
  require(!params.blocks.empty(), std::string(who) + ": flow has no blocks");
}

ParticleCloud forward_batch(const FlowParams& params, const ParticleCloud& thetas,
                            Eigen::VectorXd& logdets, std::vector<BlockCache>* caches) {
  ParticleCloud u = thetas;
  logdets = Eigen::VectorXd::Zero(thetas.rows());
  if (caches) caches->resize(params.blocks.size());
  for (std::size_t k = 0; k < params.blocks.size(); ++k) {
    const CouplingBlock& b = params.blocks[k];
    BlockCache local;
    BlockCache& c = caches ? (*caches)[k] : local;
    c.input = u;
    c.pass = u.middleCols(b.pass_offset, b.pass_size);
    const Eigen::MatrixXd s = mlp_forward(b.scale, c.pass, caches ? &c.scale : nullptr);
    const Eigen::MatrixXd t = mlp_forward(b.shift, c.pass, caches ? &c.shift : nullptr);
    c.exp_s = s.array().exp();
    u.middleCols(b.trans_offset, b.trans_size) =
        (u.middleCols(b.trans_offset, b.trans_size).array() * c.exp_s + t.array()).matrix();
    logdets += s.rowwise().sum();
  }
  return u;
}

struct LossParts {
  double loss;
  Eigen::MatrixXd g_alpha;  // m x d
  double g_logdet;          // same for every particle
};

LossParts loss_from_images(const ParticleCloud& alpha, const Eigen::VectorXd& logdets,
                           const ParticleCloud& cloud, const Dataset<double>& data,
                           const MfldSpec<double>& spec, double xi, bool want_grad) {
  const auto m = static_cast<double>(cloud.rows());
  const auto n = static_cast<double>(data.size());
  Eigen::MatrixXd act = detail::fast_tanh((data.inputs * alpha.transpose()).array()).matrix();
  const Eigen::VectorXd residual = act.rowwise().mean() - data.labels;
  const ParticleCloud disp = alpha - cloud;
  LossParts out;
  out.loss = 0.5 * residual.squaredNorm() / n + spec.lambda * alpha.squaredNorm() / m -
             spec.tau * logdets.sum() / m + disp.squaredNorm() / (2.0 * m * xi);
  out.g_logdet = -spec.tau / m;
  if (want_grad) {
    act = ((1.0 - act.array().square()).colwise() * (residual.array() / n)).matrix();
    out.g_alpha = (act.transpose() * data.inputs + 2.0 * spec.lambda * alpha + disp / xi) / m;
  }
  return out;
}

void check_loss_inputs(const FlowParams& params, const ParticleCloud& cloud,
                       const Dataset<double>& data, const MfldSpec<double>& spec, double xi) {
  require(xi > 0 && std::isfinite(xi), "flow_loss: xi must be > 0");
  require_valid(spec);
  detail::require_matching(cloud, data);
  require_dims(params, cloud.cols(), "flow_loss");
}

FlowParams zeros_like(const FlowParams& p) {
  FlowParams g = p;
  for (auto& b : g.blocks) {
    for (SmoothMlp* net : {&b.scale, &b.shift}) {
      net->w1.setZero();
      net->b1.setZero();
      net->w2.setZero();
      net->b2.setZero();
    }
  }
  return g;
}

template <typename Params, typename Fn>
void for_each_array(Params& p, Fn&& fn) {
  for (auto& b : p.blocks) {
    for (auto* net : {&b.scale, &b.shift}) {
      fn(net->w1.data(), net->w1.size());
      fn(net->b1.data(), net->b1.size());
      fn(net->w2.data(), net->w2.size());
      fn(net->b2.data(), net->b2.size());
    }
  }
}

}  // namespace

Eigen::Index FlowParams::parameter_count() const {
  Eigen::Index n = 0;
  for (const auto& b : blocks)
    for (const SmoothMlp* net : {&b.scale, &b.shift})
      n += net->w1.size() + net->b1.size() + net->w2.size() + net->b2.size();
  return n;
}

bool FlowParams::all_finite() const {
  for (const auto& b : blocks)
    for (const SmoothMlp* net : {&b.scale, &b.shift})
      if (!net->w1.allFinite() || !net->b1.allFinite() || !net->w2.allFinite() ||
          !net->b2.allFinite())
        return false;
  return true;
}

FlowParams init_near_identity(Eigen::Index dim, int blocks, Eigen::Index hidden, double scale,
                              SeededRng& rng) {
  require(dim >= 1, "init_near_identity: dim must be >= 1");
  require(blocks >= 1, "init_near_identity: need at least one block");
  require(hidden >= 1, "init_near_identity: hidden width must be >= 1");
  require(scale >= 0 && std::isfinite(scale), "init_near_identity: scale must be >= 0");
  const Eigen::Index split = dim / 2;
  FlowParams p;
  p.dim = dim;
  for (int k = 0; k < blocks; ++k) {
    CouplingBlock b;
    b.parity = (k % 2) == 1;
    if (!b.parity) {
      b.pass_offset = 0;
      b.pass_size = split;
      b.trans_offset = split;
      b.trans_size = dim - split;
    } else {
      b.pass_offset = split;
      b.pass_size = dim - split;
      b.trans_offset = 0;
      b.trans_size = split;
    }
    b.scale = make_mlp(b.pass_size, hidden, b.trans_size, scale, rng);
    b.shift = make_mlp(b.pass_size, hidden, b.trans_size, scale, rng);
    p.blocks.push_back(std::move(b));
  }
  return p;
}

FlowBatchImage flow_forward(const FlowParams& params, const ParticleCloud& thetas) {
  require_dims(params, thetas.cols(), "flow_forward");
  require(params.all_finite(), "flow_forward: non-finite parameters");
  FlowBatchImage out;
  out.images = forward_batch(params, thetas, out.logdets, nullptr);
  return out;
}

FlowImage flow_forward(const FlowParams& params, const Eigen::VectorXd& theta) {
  FlowBatchImage batch = flow_forward(params, ParticleCloud(theta.transpose()));
  return {batch.images.row(0).transpose(), batch.logdets(0)};
}

ParticleCloud flow_inverse(const FlowParams& params, const ParticleCloud& alphas) {
  require_dims(params, alphas.cols(), "flow_inverse");
  ParticleCloud v = alphas;
  for (auto it = params.blocks.rbegin(); it != params.blocks.rend(); ++it) {
    const CouplingBlock& b = *it;
    const Eigen::MatrixXd pass = v.middleCols(b.pass_offset, b.pass_size);
    const Eigen::MatrixXd s = mlp_forward(b.scale, pass, nullptr);
    const Eigen::MatrixXd t = mlp_forward(b.shift, pass, nullptr);
    v.middleCols(b.trans_offset, b.trans_size) =
        ((v.middleCols(b.trans_offset, b.trans_size) - t).array() * (-s.array()).exp()).matrix();
  }
  return v;
}

Eigen::VectorXd flow_inverse(const FlowParams& params, const Eigen::VectorXd& alpha) {
  return flow_inverse(params, ParticleCloud(alpha.transpose())).row(0).transpose();
}

double flow_loss(const FlowParams& params, const ParticleCloud& cloud, const Dataset<double>& data,
                 const MfldSpec<double>& spec, double xi) {
  check_loss_inputs(params, cloud, data, spec, xi);
  Eigen::VectorXd logdets;
  const ParticleCloud alpha = forward_batch(params, cloud, logdets, nullptr);
  return loss_from_images(alpha, logdets, cloud, data, spec, xi, false).loss;
}

FlowLossAndGradient flow_loss_gradient(const FlowParams& params, const ParticleCloud& cloud,
                                       const Dataset<double>& data, const MfldSpec<double>& spec,
                                       double xi) {
  check_loss_inputs(params, cloud, data, spec, xi);
  std::vector<BlockCache> caches;
  Eigen::VectorXd logdets;
  const ParticleCloud alpha = forward_batch(params, cloud, logdets, &caches);
  LossParts parts = loss_from_images(alpha, logdets, cloud, data, spec, xi, true);

  FlowLossAndGradient out{parts.loss, zeros_like(params)};
  Eigen::MatrixXd g_v = std::move(parts.g_alpha);
  for (std::size_t k = params.blocks.size(); k-- > 0;) {
    const CouplingBlock& b = params.blocks[k];
    const BlockCache& c = caches[k];
    CouplingBlock& gb = out.gradient.blocks[k];
    const Eigen::ArrayXXd g_trans = g_v.middleCols(b.trans_offset, b.trans_size).array();
    const Eigen::ArrayXXd u_trans = c.input.middleCols(b.trans_offset, b.trans_size).array();
    // v_trans = u_trans * exp(s) + t, logdet += sum(s)
    const Eigen::MatrixXd g_s = (g_trans * u_trans * c.exp_s + parts.g_logdet).matrix();
    const Eigen::MatrixXd g_t = g_trans.matrix();
    Eigen::MatrixXd g_u = g_v;
    g_u.middleCols(b.trans_offset, b.trans_size) = (g_trans * c.exp_s).matrix();
    g_u.middleCols(b.pass_offset, b.pass_size) +=
        mlp_backward(b.scale, c.pass, c.scale, g_s, gb.scale) +
        mlp_backward(b.shift, c.pass, c.shift, g_t, gb.shift);
    g_v = std::move(g_u);
  }
  return out;
}

void axpy(FlowParams& params, double a, const FlowGradient& direction) {
  require(params.blocks.size() == direction.blocks.size(), "axpy: shape mismatch");
  for (std::size_t k = 0; k < params.blocks.size(); ++k) {
    auto& b = params.blocks[k];
    const auto& g = direction.blocks[k];
    b.scale.w1 += a * g.scale.w1;
    b.scale.b1 += a * g.scale.b1;
    b.scale.w2 += a * g.scale.w2;
    b.scale.b2 += a * g.scale.b2;
    b.shift.w1 += a * g.shift.w1;
    b.shift.b1 += a * g.shift.b1;
    b.shift.w2 += a * g.shift.w2;
    b.shift.b2 += a * g.shift.b2;
  }
}

Eigen::VectorXd to_vector(const FlowParams& params) {
  Eigen::VectorXd flat(params.parameter_count());
  Eigen::Index pos = 0;
  for_each_array(params, [&](const double* data, Eigen::Index n) {
    flat.segment(pos, n) = Eigen::Map<const Eigen::VectorXd>(data, n);
    pos += n;
  });
  return flat;
}

void assign_from_vector(FlowParams& params, const Eigen::VectorXd& flat) {
  require(flat.size() == params.parameter_count(), "assign_from_vector: size mismatch");
  Eigen::Index pos = 0;
  for_each_array(params, [&](double* data, Eigen::Index n) {
    Eigen::Map<Eigen::VectorXd>(data, n) = flat.segment(pos, n);
    pos += n;
  });
}

FitResult sgd_fit(FlowParams params, const ParticleCloud& cloud, const Dataset<double>& data,
                  const MfldSpec<double>& spec, double xi, double lr, int iters,
                  Eigen::Index batch, SeededRng* rng) {
  require(lr > 0 && std::isfinite(lr), "sgd_fit: lr must be > 0");
  require(iters >= 1, "sgd_fit: iters must be >= 1");
  require(batch >= 0, "sgd_fit: batch must be >= 0");
  const bool minibatch = batch > 0 && batch < data.size();
  require(!minibatch || rng != nullptr, "sgd_fit: minibatch requires an rng");

  FitResult out;
  out.loss_trace.reserve(iters + 1);
  Dataset<double> sub;
  for (int it = 0; it < iters; ++it) {
    const Dataset<double>* view = &data;
    if (minibatch) {
      sub.inputs.resize(batch, data.dim());
      sub.labels.resize(batch);
      for (Eigen::Index b = 0; b < batch; ++b) {
        const auto i = static_cast<Eigen::Index>(rng->next_u64() %
                                                 static_cast<std::uint64_t>(data.size()));
        sub.inputs.row(b) = data.inputs.row(i);
        sub.labels(b) = data.labels(i);
      }
      view = &sub;
    }
    FlowLossAndGradient lg = flow_loss_gradient(params, cloud, *view, spec, xi);
    if (!std::isfinite(lg.loss)) {
      throw DivergenceError("sgd_fit: non-finite loss at inner iteration " + std::to_string(it));
    }
    out.loss_trace.push_back(lg.loss);
    axpy(params, -lr, lg.gradient);
  }
  out.final_loss = flow_loss(params, cloud, data, spec, xi);
  if (!std::isfinite(out.final_loss) || !params.all_finite()) {
    throw DivergenceError("sgd_fit: non-finite loss after final update");
  }
  out.loss_trace.push_back(out.final_loss);
  out.params = std::move(params);
  return out;
}

}  // namespace wprox
