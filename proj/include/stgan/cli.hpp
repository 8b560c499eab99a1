#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stgan/evaluation.hpp"
#include "stgan/presets.hpp"
#include "stgan/wgan.hpp"

namespace stgan::cli {

// Relative output paths are resolved under $STGAN_OUT_ROOT when it is set.
std::string resolve_out_dir(const std::string& out);

std::string checkpoint_filename(std::uint64_t tick);

// Loads every *.stgan file in the directory, sorted by tick ascending.
std::vector<GeneratorCheckpoint> load_checkpoint_dir(const std::string& dir);

struct RenderArgs {
  std::string preset = "rendered";
  std::vector<std::string> spec0;  // per-feature distribution overrides, label 0
  std::vector<std::string> spec1;
  std::size_t rows = 0;  // rows per label; 0 takes the preset default
  std::uint64_t seed = 1;
  std::string out;
  std::string name = "ds";
};
int cmd_render(const RenderArgs& args);

struct TrainArgs {
  std::string data;       // training dataset CSV (the GAN sees one label of it)
  std::string eval_data;  // optional held-out CSV; enables nested F1 at eval ticks
  int label = 0;
  std::string activation = "smirnov";  // or "linear"
  std::string preset = "rendered-desk";
  std::string config_file;  // JSON overrides, applied before flag overrides
  std::optional<std::size_t> minibatches;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch;
  std::optional<std::size_t> checkpoint_interval;
  std::optional<std::size_t> eval_interval;
  std::optional<std::size_t> critic_steps;
  std::optional<std::size_t> metric_samples;
  std::optional<std::size_t> metric_bins;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;
};
int cmd_train(const TrainArgs& args);

struct EvalMarginalArgs {
  std::string data;       // DS1
  std::string eval_data;  // DS2
  std::string ckpt_dir;
  int label = 0;
  std::string preset = "rendered-desk";
  std::optional<std::size_t> trees;
  std::optional<int> depth;  // -1 = unlimited
  std::size_t bins = 10;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;
};
int cmd_eval_marginal(const EvalMarginalArgs& args);

struct EvalJointArgs {
  std::string data;       // DS1
  std::string eval_data;  // DS2
  std::string ckpt_dir0;
  std::string ckpt_dir1;
  std::string marginal0;  // marginal trace CSVs (needed by elitism)
  std::string marginal1;
  std::string strategy = "uniform";  // "uniform" or "top<k>"
  std::string mode = "gan";          // "gan", "replay", "mean-baseline"
  double noise_scale = 0.5;
  std::size_t runs = 100;
  std::size_t n0 = 0;  // synthetic rows per label; 0 = DS1's real counts
  std::size_t n1 = 0;
  std::string preset = "rendered-desk";
  std::optional<std::size_t> trees;
  std::optional<int> depth;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;
};
int cmd_eval_joint(const EvalJointArgs& args);

struct MetricsArgs {
  std::string data_a;  // reference (real) CSV
  std::string data_b;  // comparison (synthetic) CSV
  int label_a = -1;    // -1 = all rows
  int label_b = -1;
  std::size_t bins = 10;
  bool kde = false;
  double bandwidth = 0.0;  // 0 = Silverman
  std::string out;
};
int cmd_metrics(const MetricsArgs& args);

struct ReportArgs {
  std::string runs_file;  // runs.json from eval-joint
  std::string out;
};
int cmd_report(const ReportArgs& args);

// Parses per-run records back into a JointSummary (inverse of the runs.json
// written by cmd_eval_joint).
JointSummary joint_summary_from_runs_json(const std::string& text);

// Full argument parsing + dispatch; maps the error taxonomy onto exit codes
// 0 success, 2 config, 3 data/io/format, 4 numeric.
int run_cli(int argc, const char* const* argv);

}  // namespace stgan::cli
