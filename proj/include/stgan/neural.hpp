#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "stgan/common.hpp"
#include "stgan/smirnov.hpp"

namespace stgan {

enum class OutputActivationKind { linear, smirnov };

struct MlpConfig {
  std::size_t in_width = 0;
  std::vector<std::size_t> hidden_widths;
  std::size_t out_width = 0;
  double leaky_alpha = 0.2;
  bool batch_norm = false;  // hidden layers only, after the affine, before the activation
  double dropout = 0.0;     // hidden layers only, after the activation
  double l2 = 0.0;          // applied to weight matrices only, as 2*l2*w on the gradient
  OutputActivationKind output = OutputActivationKind::linear;
};

enum class Mode { train, infer };

struct LayerCache {
  Matrix input;       // batch fed into the affine
  Matrix z;           // affine output
  Matrix x_hat;       // batch-norm normalized values
  Vector mean;        // mean used by the normalization (batch or running)
  Vector inv_std;     // 1/sqrt(var + eps) used by the normalization
  bool bn_batch_stats = false;  // true when train-mode batch statistics applied
  Matrix pre_act;     // after batch norm (or z when disabled)
  Matrix mask;        // inverted-dropout mask (empty when inactive)
  Matrix activation_deriv;  // output layer only: S'(z) per element
};

struct ForwardCache {
  std::vector<LayerCache> layers;
};

struct Gradients {
  std::vector<Matrix> w;
  std::vector<Vector> b;
  std::vector<Vector> gamma;
  std::vector<Vector> beta;
  Matrix input;  // dL/dX for the batch
};

struct Layer {
  Matrix w;  // out x in
  Vector b;
  bool bn = false;
  Vector gamma, beta, running_mean, running_var;
};

// Fully connected net: hidden layers use LeakyReLU with optional batch norm
// and dropout; the output layer is affine followed by either the identity or
// per-unit Smirnov activations. All math in double precision.
class Mlp {
 public:
  static Mlp init(const MlpConfig& cfg, std::uint64_t seed);

  // `rng` drives dropout masks (required in train mode when dropout > 0);
  // `update_running` folds the batch statistics into the running estimates
  // (only the owning training step should pass true).
  Matrix forward(const Matrix& x, Mode mode, RngStream* rng = nullptr,
                 ForwardCache* cache = nullptr, bool update_running = false);

  // Exact reverse-mode gradients for the forward pass that produced `cache`,
  // including the Smirnov derivative and the L2 term 2*l2*w on weights.
  Gradients backward(const ForwardCache& cache, const Matrix& upstream) const;

  void set_output_activations(std::shared_ptr<const std::vector<SmirnovActivation>> acts);
  const std::vector<SmirnovActivation>* output_activations() const {
    return output_activations_ ? output_activations_.get() : nullptr;
  }
  std::shared_ptr<const std::vector<SmirnovActivation>> shared_output_activations() const {
    return output_activations_;
  }

  const MlpConfig& config() const { return config_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  std::size_t parameter_count() const;

 private:
  MlpConfig config_;
  std::vector<Layer> layers_;
  std::shared_ptr<const std::vector<SmirnovActivation>> output_activations_;
};

enum class OptimizerKind { adam, rmsprop };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double lr = 1e-3;
  double beta1 = 0.9;    // adam
  double beta2 = 0.999;  // adam
  double decay = 0.9;    // rmsprop
  double eps = 1e-8;
};

// Per-parameter moment buffers; one state object per optimized net.
class OptimizerState {
 public:
  explicit OptimizerState(const Mlp& net);
  void step(Mlp& net, const Gradients& grads, const OptimizerConfig& cfg);
  std::uint64_t steps_taken() const { return t_; }

 private:
  struct Slot {
    Matrix m_w, v_w;
    Vector m_b, v_b, m_g, v_g, m_be, v_be;
  };
  std::vector<Slot> slots_;
  std::uint64_t t_ = 0;
};

}  // namespace stgan
