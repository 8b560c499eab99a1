#include "stgan/neural.hpp"

#include <cmath>

namespace stgan {

namespace {
constexpr double bn_eps = 1e-5;
constexpr double bn_momentum = 0.9;  // running = 0.9*running + 0.1*batch
}  // namespace

Mlp Mlp::init(const MlpConfig& cfg, std::uint64_t seed) {
  if (cfg.in_width == 0 || cfg.out_width == 0)
    throw ConfigError("Mlp: input and output widths must be positive");
  for (std::size_t w : cfg.hidden_widths)
    if (w == 0) throw ConfigError("Mlp: hidden widths must be positive");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0)
    throw ConfigError("Mlp: dropout must lie in [0, 1)");
  Mlp net;
  net.config_ = cfg;
  RngStream rng(seed);
  std::vector<std::size_t> widths;
  widths.push_back(cfg.in_width);
  for (std::size_t w : cfg.hidden_widths) widths.push_back(w);
  widths.push_back(cfg.out_width);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    Layer layer;
    const auto fan_in = static_cast<double>(widths[l]);
    const double bound = std::sqrt(6.0 / fan_in);
    layer.w.resize(static_cast<Eigen::Index>(widths[l + 1]), static_cast<Eigen::Index>(widths[l]));
    for (Eigen::Index r = 0; r < layer.w.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c) layer.w(r, c) = rng.uniform(-bound, bound);
    layer.b = Vector::Zero(static_cast<Eigen::Index>(widths[l + 1]));
    const bool is_hidden = l + 2 < widths.size();
    layer.bn = cfg.batch_norm && is_hidden;
    if (layer.bn) {
      const auto w = static_cast<Eigen::Index>(widths[l + 1]);
      layer.gamma = Vector::Ones(w);
      layer.beta = Vector::Zero(w);
      layer.running_mean = Vector::Zero(w);
      layer.running_var = Vector::Ones(w);
    }
    net.layers_.push_back(std::move(layer));
  }
  return net;
}

void Mlp::set_output_activations(std::shared_ptr<const std::vector<SmirnovActivation>> acts) {
  if (config_.output != OutputActivationKind::smirnov)
    throw ContractError("Mlp: output activations only apply to smirnov nets");
  if (!acts || acts->size() != config_.out_width)
    throw ContractError("Mlp: need one output activation per output unit");
  output_activations_ = std::move(acts);
}

Matrix Mlp::forward(const Matrix& x, Mode mode, RngStream* rng, ForwardCache* cache,
                    bool update_running) {
  if (static_cast<std::size_t>(x.cols()) != config_.in_width)
    throw ContractError("Mlp::forward: input width mismatch");
  if (config_.output == OutputActivationKind::smirnov && !output_activations_)
    throw ContractError("Mlp::forward: smirnov activations not set");
  if (cache) cache->layers.assign(layers_.size(), LayerCache{});

  Matrix cur = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Layer& layer = layers_[l];
    const bool is_output = l + 1 == layers_.size();
    LayerCache* lc = cache ? &cache->layers[l] : nullptr;
    if (lc) lc->input = cur;

    Matrix z = cur * layer.w.transpose();
    z.rowwise() += layer.b.transpose();
    if (lc) lc->z = z;

    Matrix pre = std::move(z);
    if (layer.bn) {
      if (mode == Mode::train) {
        const auto n = static_cast<double>(pre.rows());
        if (pre.rows() < 2)
          throw ContractError("Mlp::forward: batch norm needs a batch of at least 2 in train mode");
        Vector mean = pre.colwise().mean().transpose();
        Matrix centered = pre.rowwise() - mean.transpose();
        Vector var = (centered.array().square().matrix().colwise().sum() / n).transpose();
        Vector inv_std = (var.array() + bn_eps).rsqrt().matrix();
        Matrix x_hat = (centered.array().rowwise() * inv_std.transpose().array()).matrix();
        if (update_running) {
          layer.running_mean = bn_momentum * layer.running_mean + (1.0 - bn_momentum) * mean;
          layer.running_var = bn_momentum * layer.running_var + (1.0 - bn_momentum) * var;
        }
        if (lc) {
          lc->mean = mean;
          lc->inv_std = inv_std;
          lc->x_hat = x_hat;
          lc->bn_batch_stats = true;
        }
        pre = (x_hat.array().rowwise() * layer.gamma.transpose().array()).matrix();
        pre.rowwise() += layer.beta.transpose();
      } else {
        Vector inv_std = (layer.running_var.array() + bn_eps).rsqrt().matrix();
        Matrix centered = pre.rowwise() - layer.running_mean.transpose();
        Matrix x_hat = (centered.array().rowwise() * inv_std.transpose().array()).matrix();
        if (lc) {
          lc->mean = layer.running_mean;
          lc->inv_std = inv_std;
          lc->x_hat = x_hat;
          lc->bn_batch_stats = false;
        }
        pre = (x_hat.array().rowwise() * layer.gamma.transpose().array()).matrix();
        pre.rowwise() += layer.beta.transpose();
      }
    }
    if (lc) lc->pre_act = pre;

    if (is_output) {
      if (config_.output == OutputActivationKind::smirnov) {
        const auto& acts = *output_activations_;
        Matrix out(pre.rows(), pre.cols());
        Matrix deriv(pre.rows(), pre.cols());
        for (Eigen::Index c = 0; c < pre.cols(); ++c) {
          const auto& act = acts[static_cast<std::size_t>(c)];
          for (Eigen::Index r = 0; r < pre.rows(); ++r) {
            const ActivationValue v = act.eval(pre(r, c));
            out(r, c) = v.value;
            deriv(r, c) = v.deriv;
          }
        }
        if (lc) lc->activation_deriv = std::move(deriv);
        cur = std::move(out);
      } else {
        cur = std::move(pre);
      }
      continue;
    }

    // hidden activation: LeakyReLU on the (possibly normalized) pre-activation
    const double alpha = config_.leaky_alpha;
    Matrix activated = pre.unaryExpr([alpha](double v) { return v > 0.0 ? v : alpha * v; });

    if (config_.dropout > 0.0 && mode == Mode::train) {
      if (!rng) throw ContractError("Mlp::forward: dropout in train mode needs an RNG stream");
      const double keep = 1.0 - config_.dropout;
      Matrix mask(activated.rows(), activated.cols());
      for (Eigen::Index r = 0; r < mask.rows(); ++r)
        for (Eigen::Index c = 0; c < mask.cols(); ++c)
          mask(r, c) = rng->uniform01() < keep ? 1.0 / keep : 0.0;
      activated = activated.cwiseProduct(mask);
      if (lc) lc->mask = std::move(mask);
    }
    cur = std::move(activated);
  }
  return cur;
}

Gradients Mlp::backward(const ForwardCache& cache, const Matrix& upstream) const {
  if (cache.layers.size() != layers_.size())
    throw ContractError("Mlp::backward: cache does not match the net");
  Gradients g;
  g.w.resize(layers_.size());
  g.b.resize(layers_.size());
  g.gamma.resize(layers_.size());
  g.beta.resize(layers_.size());

  Matrix delta = upstream;  // dL/d(layer output), walked backwards
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const Layer& layer = layers_[li];
    const LayerCache& lc = cache.layers[li];
    const bool is_output = li + 1 == layers_.size();

    if (is_output) {
      if (config_.output == OutputActivationKind::smirnov)
        delta = delta.cwiseProduct(lc.activation_deriv);
    } else {
      if (lc.mask.size() > 0) delta = delta.cwiseProduct(lc.mask);
      const double alpha = config_.leaky_alpha;
      delta = delta.cwiseProduct(
          lc.pre_act.unaryExpr([alpha](double v) { return v > 0.0 ? 1.0 : alpha; }));
    }

    if (layer.bn) {
      g.gamma[li] = delta.cwiseProduct(lc.x_hat).colwise().sum().transpose();
      g.beta[li] = delta.colwise().sum().transpose();
      Matrix dxhat = (delta.array().rowwise() * layer.gamma.transpose().array()).matrix();
      if (lc.bn_batch_stats) {
        // batch statistics depend on every row, so the chain rule couples the batch
        const auto n = static_cast<double>(lc.z.rows());
        Vector sum_dxhat = dxhat.colwise().sum().transpose();
        Vector sum_dxhat_xhat = dxhat.cwiseProduct(lc.x_hat).colwise().sum().transpose();
        Matrix term = n * dxhat;
        term.rowwise() -= sum_dxhat.transpose();
        term -= (lc.x_hat.array().rowwise() * sum_dxhat_xhat.transpose().array()).matrix();
        delta = (term.array().rowwise() * (lc.inv_std.transpose().array() / n)).matrix();
      } else {
        // running statistics are constants, so the normalization is a fixed affine map
        delta = (dxhat.array().rowwise() * lc.inv_std.transpose().array()).matrix();
      }
    }

    g.w[li] = delta.transpose() * lc.input;
    if (config_.l2 > 0.0) g.w[li] += 2.0 * config_.l2 * layer.w;
    g.b[li] = delta.colwise().sum().transpose();
    delta = delta * layer.w;
  }
  g.input = std::move(delta);
  return g;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) {
    n += static_cast<std::size_t>(layer.w.size()) + static_cast<std::size_t>(layer.b.size());
    if (layer.bn)
      n += static_cast<std::size_t>(layer.gamma.size()) +
           static_cast<std::size_t>(layer.beta.size());
  }
  return n;
}

OptimizerState::OptimizerState(const Mlp& net) {
  for (const auto& layer : net.layers()) {
    Slot s;
    s.m_w = Matrix::Zero(layer.w.rows(), layer.w.cols());
    s.v_w = Matrix::Zero(layer.w.rows(), layer.w.cols());
    s.m_b = Vector::Zero(layer.b.size());
    s.v_b = Vector::Zero(layer.b.size());
    if (layer.bn) {
      s.m_g = Vector::Zero(layer.gamma.size());
      s.v_g = Vector::Zero(layer.gamma.size());
      s.m_be = Vector::Zero(layer.beta.size());
      s.v_be = Vector::Zero(layer.beta.size());
    }
    slots_.push_back(std::move(s));
  }
}

namespace {

template <typename T>
void adam_update(T& param, const T& grad, T& m, T& v, const OptimizerConfig& cfg, double t) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
  v = (cfg.beta2 * v.array() + (1.0 - cfg.beta2) * grad.array().square()).matrix();
  const double mc = 1.0 - std::pow(cfg.beta1, t);
  const double vc = 1.0 - std::pow(cfg.beta2, t);
  param -= (cfg.lr * (m.array() / mc) / ((v.array() / vc).sqrt() + cfg.eps)).matrix();
}

template <typename T>
void rmsprop_update(T& param, const T& grad, T& v, const OptimizerConfig& cfg) {
  v = (cfg.decay * v.array() + (1.0 - cfg.decay) * grad.array().square()).matrix();
  param -= (cfg.lr * grad.array() / (v.array() + cfg.eps).sqrt()).matrix();
}

}  // namespace

void OptimizerState::step(Mlp& net, const Gradients& grads, const OptimizerConfig& cfg) {
  if (slots_.size() != net.layers().size())
    throw ContractError("OptimizerState: net layout changed");
  ++t_;
  const auto t = static_cast<double>(t_);
  for (std::size_t l = 0; l < slots_.size(); ++l) {
    Layer& layer = net.layers()[l];
    Slot& s = slots_[l];
    if (cfg.kind == OptimizerKind::adam) {
      adam_update(layer.w, grads.w[l], s.m_w, s.v_w, cfg, t);
      adam_update(layer.b, grads.b[l], s.m_b, s.v_b, cfg, t);
      if (layer.bn) {
        adam_update(layer.gamma, grads.gamma[l], s.m_g, s.v_g, cfg, t);
        adam_update(layer.beta, grads.beta[l], s.m_be, s.v_be, cfg, t);
      }
    } else {
      rmsprop_update(layer.w, grads.w[l], s.v_w, cfg);
      rmsprop_update(layer.b, grads.b[l], s.v_b, cfg);
      if (layer.bn) {
        rmsprop_update(layer.gamma, grads.gamma[l], s.v_g, cfg);
        rmsprop_update(layer.beta, grads.beta[l], s.v_be, cfg);
      }
    }
  }
}

}  // namespace stgan
