#include "stgan/presets.hpp"

#include <stdexcept>

namespace stgan {

std::vector<std::vector<FeatureSpec>> rendered_feature_specs() {
  std::vector<FeatureSpec> label0 = {
      NormalSpec{0.0, 1.0},
      BinomialSpec{15, 0.3},
      ExponentialSpec{3.0},
      PoissonSpec{1.0},
  };
  std::vector<FeatureSpec> label1 = {
      NormalSpec{0.0, 1.0},
      DiscreteUniformSpec{0, 15},
      SnedecorFSpec{3.0, 3.0},
      PoissonSpec{2.0},
  };
  return {label0, label1};
}

namespace {

MlpConfig make_mlp(std::size_t in, std::vector<std::size_t> hidden, std::size_t out,
                   double alpha, double l2, double dropout, OutputActivationKind kind) {
  MlpConfig cfg;
  cfg.in_width = in;
  cfg.hidden_widths = std::move(hidden);
  cfg.out_width = out;
  cfg.leaky_alpha = alpha;
  cfg.batch_norm = true;
  cfg.dropout = dropout;
  cfg.l2 = l2;
  cfg.output = kind;
  return cfg;
}

OptimizerConfig adam(double lr) {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::adam;
  cfg.lr = lr;
  return cfg;
}

OptimizerConfig rmsprop(double lr) {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::rmsprop;
  cfg.lr = lr;
  return cfg;
}

}  // namespace

Preset preset_rendered() {
  Preset p;
  p.name = "rendered";

  GanConfig g;
  g.latent = LatentConfig{100, LatentFamily::uniform, 1.5};
  g.gen = make_mlp(g.latent.dim, {500, 3000, 5000, 400}, 4, 0.2, 0.1, 0.0,
                   OutputActivationKind::smirnov);
  g.critic = make_mlp(4, {280, 503, 177, 23}, 1, 0.15, 0.001, 0.0,
                      OutputActivationKind::linear);
  g.gen_opt = adam(1e-3);
  g.critic_opt = rmsprop(1e-4);
  p.gan_label0 = g;
  p.gan_label1 = g;

  p.schedule.batch_size = 800;
  p.schedule.total_minibatches = 25000;
  p.schedule.checkpoint_interval = 10;
  p.schedule.eval_interval = 0;
  p.schedule.critic_steps = 1;
  p.schedule.metric_bins = 10;

  p.forest.n_trees = 300;
  p.forest.max_depth = 20;
  p.trace_forest = p.forest;

  p.default_rows_per_label = 400000;
  return p;
}

Preset preset_flows() {
  Preset p;
  p.name = "flows";

  LatentConfig latent{123, LatentFamily::normal, 0.5};

  GanConfig g0;
  g0.latent = latent;
  g0.gen = make_mlp(latent.dim, {200, 500, 3000, 500}, 4, 0.2, 0.0, 0.0,
                    OutputActivationKind::smirnov);
  g0.critic = make_mlp(4, {380, 800, 600, 177, 23}, 1, 0.15, 0.02, 0.1,
                       OutputActivationKind::linear);
  g0.gen_opt = adam(1e-3);
  g0.critic_opt = rmsprop(1e-3);
  p.gan_label0 = g0;

  GanConfig g1;
  g1.latent = latent;
  g1.gen = make_mlp(latent.dim, {600, 3000, 1000}, 4, 0.2, 0.0, 0.0,
                    OutputActivationKind::smirnov);
  g1.critic = make_mlp(4, {280, 903, 500, 23}, 1, 0.15, 0.05, 0.15,
                       OutputActivationKind::linear);
  g1.gen_opt = adam(1e-3);
  g1.critic_opt = rmsprop(1e-3);
  p.gan_label1 = g1;

  p.schedule.batch_size = 800;
  p.schedule.total_minibatches = 25000;
  p.schedule.checkpoint_interval = 10;
  p.schedule.eval_interval = 0;
  p.schedule.critic_steps = 1;
  p.schedule.metric_bins = 10;

  p.forest.n_trees = 300;
  p.forest.max_depth = -1;
  p.trace_forest = p.forest;

  p.default_rows_per_label = 0;
  return p;
}

Preset preset_rendered_desk() {
  Preset p = preset_rendered();
  p.name = "rendered-desk";

  p.gan_label0.gen.hidden_widths = {64, 128, 128, 64};
  p.gan_label0.critic.hidden_widths = {64, 96, 48, 16};
  // small batches carry noisier gradients than the full-scale run, so the
  // generator steps gently and the critic gets two updates per round
  p.gan_label0.gen_opt.lr = 1e-4;
  p.gan_label1 = p.gan_label0;

  p.schedule.batch_size = 128;
  p.schedule.total_minibatches = 1570;  // ten epochs over 20k rows
  p.schedule.checkpoint_interval = 10;
  p.schedule.eval_interval = 160;
  p.schedule.critic_steps = 2;
  p.schedule.metric_samples = 4096;

  p.forest.n_trees = 40;
  p.forest.max_depth = 20;
  p.trace_forest.n_trees = 50;
  p.trace_forest.max_depth = 20;

  p.default_rows_per_label = 20000;
  return p;
}

Preset preset_by_name(const std::string& name) {
  if (name == "rendered") return preset_rendered();
  if (name == "flows") return preset_flows();
  if (name == "rendered-desk") return preset_rendered_desk();
  throw ConfigError("unknown preset: " + name);
}

std::vector<std::string> preset_names() { return {"rendered", "flows", "rendered-desk"}; }

}  // namespace stgan
