#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stgan/common.hpp"
#include "stgan/datasets.hpp"
#include "stgan/forest.hpp"
#include "stgan/wgan.hpp"

namespace stgan {

// Anything that can emit n synthetic rows for a seed: a trained checkpoint, a
// replay of real rows, or the mean baseline.
struct RowSource {
  std::uint64_t tick = 0;  // checkpoint tick when applicable, else position
  std::function<Matrix(std::size_t n, std::uint64_t seed)> generate;
};

RowSource make_checkpoint_source(const GeneratorCheckpoint& ckpt);
std::vector<RowSource> make_checkpoint_sources(const std::vector<GeneratorCheckpoint>& ckpts);

// Replays real rows: a permutation when n <= available, resampling otherwise.
RowSource make_replay_source(const Matrix& rows);

RowSource make_mean_baseline_source(const Matrix& real_rows, double noise_scale = 0.5);

struct MarginalRow {
  std::uint64_t tick = 0;
  double epoch = 0.0;
  double l1 = 0.0;
  double jaccard = 0.0;
  double f1_ds1 = 0.0;
  double f1_ds2 = 0.0;
};

struct MarginalTrace {
  int label = 0;
  std::vector<MarginalRow> rows;

  std::string to_csv() const;
  static MarginalTrace from_csv(const std::string& text, int label);
};

// Per checkpoint: generate as many rows of `label` as ds1 really holds, mix
// with ds1's real other-label rows, train a forest, score macro-F1 at the
// default threshold on ds1 and ds2; also record histogram metrics of the
// synthetic rows against ds1's real rows of that label.
MarginalTrace marginal_eval(int label, const std::vector<GeneratorCheckpoint>& ckpts,
                            const LabeledDataset& ds1, const LabeledDataset& ds2,
                            const ForestConfig& forest_cfg, std::uint64_t seed,
                            std::size_t bins_per_dim = 10);

enum class SelectionKind { uniform_all, elitism_topk };

struct SelectionStrategy {
  SelectionKind kind = SelectionKind::uniform_all;
  std::size_t k = 10;  // elitism pool size, ranked by marginal DS2 macro-F1
};

struct JointRun {
  std::size_t run = 0;
  std::uint64_t tick_label0 = 0;
  std::uint64_t tick_label1 = 0;
  ClassifierReport report;
};

struct JointSummary {
  std::vector<JointRun> runs;
  std::vector<double> thresholds;

  std::vector<double> macro_f1_at(double threshold) const;  // one value per run
  double best_macro_f1() const;             // max over runs and thresholds
  double best_default_macro_f1() const;     // max over runs at threshold 0.5
  std::string to_json() const;
};

// Statistical summary helpers (linear-interpolation quantiles).
double series_quantile(std::vector<double> values, double q);
double series_mean(const std::vector<double>& values);
double series_iqr(const std::vector<double>& values);

// `runs` independent draws: pick one source per label under the strategy,
// generate n0/n1 rows (0 = ds1's real per-label count), train a forest on the
// fully synthetic set, evaluate on ds2 at every threshold. Elitism ranks
// sources by the marginal DS2 macro-F1 of matching ticks.
JointSummary joint_eval(const std::vector<RowSource>& sources_label0,
                        const std::vector<RowSource>& sources_label1,
                        const SelectionStrategy& strategy,
                        const MarginalTrace* marginal_label0,
                        const MarginalTrace* marginal_label1, std::size_t runs, std::size_t n0,
                        std::size_t n1, const LabeledDataset& ds1, const LabeledDataset& ds2,
                        const ForestConfig& forest_cfg, std::uint64_t seed, int threads = 1);

struct StopDecision {
  bool stopped = false;
  std::size_t stop_position = 0;  // index into the series where training halts
  std::size_t best_position = 0;  // argmax so far (ties toward the earliest)
};

// Halt at the first position t >= window where the max over (t-window, t]
// fails to exceed the max over [0, t-window] by at least epsilon.
StopDecision stopping_check(const std::vector<double>& f1_series, std::size_t window,
                            double epsilon);

// Writes summary.json plus per-threshold macro-F1 CSVs into dir.
void emit_joint_report(const std::string& dir, const JointSummary& summary);

}  // namespace stgan
