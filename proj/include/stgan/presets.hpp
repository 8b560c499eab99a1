#pragma once

#include <string>
#include <vector>

#include "stgan/datasets.hpp"
#include "stgan/forest.hpp"
#include "stgan/wgan.hpp"

namespace stgan {

// Feature distributions of the two-label rendered benchmark.
std::vector<std::vector<FeatureSpec>> rendered_feature_specs();

struct Preset {
  std::string name;
  GanConfig gan_label0;
  GanConfig gan_label1;
  TrainSchedule schedule;
  ForestConfig forest;        // benchmark/eval forest
  ForestConfig trace_forest;  // per-tick marginal evaluations
  std::size_t default_rows_per_label = 0;  // render size hint (0 = external data)
};

// Full-scale two-label benchmark: wide generator/critic stacks, batch 800,
// 25k minibatches, uniform latent noise (std 1.5), Adam/RMSProp, 300-tree
// forest capped at depth 20.
Preset preset_rendered();

// Full-scale imbalanced-flows setup: per-label architectures, normal latent
// noise (std 0.5), critic dropout and L2, unlimited forest depth.
Preset preset_flows();

// Laptop-scale variant of the rendered preset: same optimizer and
// regularization constants with narrowed stacks, batch 128, ten epochs over
// 20k rows/label, and lighter evaluation forests.
Preset preset_rendered_desk();

Preset preset_by_name(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace stgan
