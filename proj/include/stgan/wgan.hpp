#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stgan/common.hpp"
#include "stgan/neural.hpp"

namespace stgan {

enum class LatentFamily { uniform, normal };

struct LatentConfig {
  std::size_t dim = 100;
  LatentFamily family = LatentFamily::uniform;
  double std = 1.5;  // the distribution's standard deviation
};

struct GanConfig {
  MlpConfig gen;
  MlpConfig critic;
  OptimizerConfig gen_opt;     // adam
  OptimizerConfig critic_opt;  // rmsprop
  LatentConfig latent;
  std::size_t smirnov_knots = 1024;
  double smirnov_clip = 6.0;
  bool snap_discrete = true;
};

struct TrainSchedule {
  std::size_t batch_size = 800;
  std::size_t total_minibatches = 25000;
  std::size_t checkpoint_interval = 10;  // minibatches per tick
  std::size_t eval_interval = 0;         // minibatches; 0 disables hook calls
  std::size_t critic_steps = 1;
  std::uint64_t seed = 0;
  std::size_t metric_samples = 0;  // rows generated for per-tick metrics; 0 = real count
  std::size_t metric_bins = 10;
};

// Frozen generator snapshot: everything needed to sample rows later.
struct GeneratorCheckpoint {
  std::uint64_t tick = 0;
  std::uint64_t minibatch = 0;
  double epoch = 0.0;
  int label = 0;
  Mlp generator;
  LatentConfig latent;
  bool snap_discrete = true;

  std::string to_bytes() const;
  static GeneratorCheckpoint from_bytes(const std::string& bytes);
  void save(const std::string& path) const;
  static GeneratorCheckpoint load(const std::string& path);
};

struct TraceRow {
  std::uint64_t tick = 0;
  std::uint64_t minibatch = 0;
  double epoch = 0.0;
  double critic_loss = 0.0;
  double gen_loss = 0.0;
  double l1 = 0.0;
  double jaccard = 0.0;
  std::optional<double> f1_ds1;
  std::optional<double> f1_ds2;
};

struct TrainTrace {
  std::vector<TraceRow> rows;
  std::size_t minibatches_per_epoch = 0;

  // header: tick,minibatch,epoch,critic_loss,gen_loss,l1,jaccard,f1_ds1,f1_ds2
  std::string to_csv() const;
};

// Hook called at eval ticks with the freshly written checkpoint; returns
// macro-F1 on the two held datasets.
using EvalHook = std::function<std::pair<double, double>(const GeneratorCheckpoint&)>;

struct TrainResult {
  TrainTrace trace;
  std::vector<GeneratorCheckpoint> checkpoints;
};

// Wasserstein adversarial training on one label's rows. The critic minimizes
// mean(D(fake)) - mean(D(real)) by RMSProp; the generator minimizes
// -mean(D(fake)) by Adam. No weight clipping, no gradient penalty. Smirnov
// output activations are built once from the real columns before training.
TrainResult wgan_train(const Matrix& real_rows, int label, const GanConfig& cfg,
                       const TrainSchedule& schedule, const EvalHook& eval_hook = nullptr);

// Samples rows from a checkpoint: latent draws, inference-mode forward,
// nearest-atom snapping for discrete Smirnov outputs.
Matrix generate_rows(const GeneratorCheckpoint& ckpt, std::size_t n, std::uint64_t seed);

// Degenerate reference generator: per-feature training mean plus Gaussian
// noise scaled to noise_scale times the feature's standard deviation.
Matrix mean_baseline_rows(const Matrix& real_rows, std::size_t n, std::uint64_t seed,
                          double noise_scale = 0.5);

}  // namespace stgan
