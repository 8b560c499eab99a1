#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "stgan/evaluation.hpp"

using namespace stgan;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// source whose rows are all equal to its tick value, for tracking selections
RowSource constant_source(std::uint64_t tick, Eigen::Index cols) {
  RowSource src;
  src.tick = tick;
  const double value = static_cast<double>(tick);
  src.generate = [value, cols](std::size_t n, std::uint64_t) {
    return Matrix::Constant(static_cast<Eigen::Index>(n), cols, value);
  };
  return src;
}

LabeledDataset two_label_gaussians(std::size_t per_label, double mu1, std::uint64_t seed) {
  const std::vector<std::vector<FeatureSpec>> specs = {
      {NormalSpec{0.0, 1.0}},
      {NormalSpec{mu1, 1.0}},
  };
  return render_dataset(specs, {per_label, per_label}, seed);
}

}  // namespace

TEST_CASE("stopping rule halts when the recent window stops improving") {
  // strict plateau detection: a constant series only stops for positive epsilon
  const std::vector<double> flat(10, 0.5);
  const StopDecision eager = stopping_check(flat, 5, 0.01);
  CHECK(eager.stopped);
  CHECK(eager.stop_position == 5);
  CHECK(eager.best_position == 0);
  CHECK_FALSE(stopping_check(flat, 5, 0.0).stopped);

  const std::vector<double> rising = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  const StopDecision up = stopping_check(rising, 3, 0.0);
  CHECK_FALSE(up.stopped);
  CHECK(up.best_position == 6);

  const std::vector<double> falling = {0.9, 0.8, 0.7, 0.6};
  const StopDecision down = stopping_check(falling, 2, 0.0);
  CHECK(down.stopped);
  CHECK(down.stop_position == 2);
  CHECK(down.best_position == 0);

  const std::vector<double> peaked = {0.1, 0.5, 0.9, 0.85, 0.8, 0.75, 0.7};
  const StopDecision peak = stopping_check(peaked, 2, 0.0);
  CHECK(peak.stopped);
  CHECK(peak.stop_position == 4);
  CHECK(peak.best_position == 2);

  // series shorter than the window cannot stop
  const StopDecision shorty = stopping_check({0.3, 0.9}, 5, 0.1);
  CHECK_FALSE(shorty.stopped);
  CHECK(shorty.best_position == 1);

  CHECK_THROWS_AS(stopping_check(flat, 0, 0.1), ConfigError);
  CHECK_THROWS_AS(stopping_check(flat, 3, -0.1), ConfigError);
}

TEST_CASE("series statistics use linear-interpolation quantiles") {
  const std::vector<double> v = {4.0, 1.0, 3.0, 2.0};  // order must not matter
  CHECK(series_quantile(v, 0.5) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(series_quantile(v, 0.25) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(series_quantile(v, 0.75) == doctest::Approx(3.25).epsilon(1e-15));
  CHECK(series_quantile(v, 0.0) == 1.0);
  CHECK(series_quantile(v, 1.0) == 4.0);
  CHECK(series_iqr(v) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(series_mean(v) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(series_quantile({7.0}, 0.99) == 7.0);

  CHECK_THROWS_AS(series_quantile({}, 0.5), DataError);
  CHECK_THROWS_AS(series_quantile({1.0}, 1.5), ConfigError);
  CHECK_THROWS_AS(series_mean({}), DataError);
}

TEST_CASE("replay source permutes without replacement when counts allow") {
  Matrix rows(6, 1);
  rows << 10, 20, 30, 40, 50, 60;
  const RowSource src = make_replay_source(rows);

  const Matrix all = src.generate(6, 3);
  std::multiset<double> got, want;
  for (Eigen::Index i = 0; i < 6; ++i) {
    got.insert(all(i, 0));
    want.insert(rows(i, 0));
  }
  CHECK(got == want);  // a permutation, nothing lost or duplicated

  const Matrix some = src.generate(4, 3);
  for (Eigen::Index i = 0; i < some.rows(); ++i) CHECK(want.count(some(i, 0)) == 1);
  std::set<double> distinct;
  for (Eigen::Index i = 0; i < some.rows(); ++i) distinct.insert(some(i, 0));
  CHECK(distinct.size() == 4);  // without replacement

  // oversampling falls back to draws with replacement but stays on support
  const Matrix big = src.generate(500, 4);
  REQUIRE(big.rows() == 500);
  std::set<double> seen;
  for (Eigen::Index i = 0; i < big.rows(); ++i) {
    CHECK(want.count(big(i, 0)) == 1);
    seen.insert(big(i, 0));
  }
  CHECK(seen.size() == 6);

  CHECK(src.generate(6, 3) == all);                 // seed-deterministic
  CHECK(src.generate(6, 4) != all);                 // seed-sensitive order
}

TEST_CASE("marginal trace csv round-trips with a fixed header") {
  MarginalTrace trace;
  trace.label = 1;
  trace.rows = {
      {0, 0.0, 1.25, 0.5, 0.5, 0.625},
      {3, 1.5, 0.03125, 0.875, 0.8125, 0.75},
  };
  const std::string csv = trace.to_csv();
  CHECK(csv.rfind("tick,epoch,l1,jaccard,f1_ds1,f1_ds2\n", 0) == 0);

  const MarginalTrace back = MarginalTrace::from_csv(csv, 1);
  CHECK(back.label == 1);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[0].tick == 0);
  CHECK(back.rows[1].tick == 3);
  CHECK(back.rows[1].epoch == 1.5);
  CHECK(back.rows[1].l1 == 0.03125);
  CHECK(back.rows[1].jaccard == 0.875);
  CHECK(back.rows[1].f1_ds1 == 0.8125);
  CHECK(back.rows[1].f1_ds2 == 0.75);
  CHECK(back.to_csv() == csv);

  CHECK_THROWS_AS(MarginalTrace::from_csv("", 0), FormatError);
  CHECK_THROWS_AS(MarginalTrace::from_csv("wrong,header\n", 0), FormatError);
  CHECK_THROWS_WITH_AS(
      MarginalTrace::from_csv("tick,epoch,l1,jaccard,f1_ds1,f1_ds2\n1,0.5,0.1\n", 0),
      doctest::Contains("line 2"), FormatError);
  CHECK_THROWS_WITH_AS(
      MarginalTrace::from_csv("tick,epoch,l1,jaccard,f1_ds1,f1_ds2\n1,x,0.1,0.2,0.3,0.4\n", 0),
      doctest::Contains("line 2"), FormatError);
}

TEST_CASE("marginal evaluation scores every checkpoint deterministically") {
  const std::vector<std::vector<FeatureSpec>> specs = {
      {NormalSpec{0.0, 1.0}, PoissonSpec{1.0}},
      {NormalSpec{2.0, 1.0}, PoissonSpec{3.0}},
  };
  const LabeledDataset ds1 = render_dataset(specs, {250, 250}, 91);
  const LabeledDataset ds2 = render_dataset(specs, {250, 250}, 92);

  GanConfig cfg;
  cfg.latent.dim = 4;
  cfg.gen.in_width = 4;
  cfg.gen.hidden_widths = {12};
  cfg.gen.out_width = 2;
  cfg.gen.batch_norm = true;
  cfg.gen.output = OutputActivationKind::smirnov;
  cfg.critic.in_width = 2;
  cfg.critic.hidden_widths = {12};
  cfg.critic.out_width = 1;
  cfg.critic.batch_norm = true;
  cfg.gen_opt.kind = OptimizerKind::adam;
  cfg.critic_opt.kind = OptimizerKind::rmsprop;
  cfg.smirnov_knots = 128;

  TrainSchedule sched;
  sched.batch_size = 50;
  sched.total_minibatches = 10;
  sched.checkpoint_interval = 5;
  sched.seed = 11;
  const TrainResult trained = wgan_train(ds1.rows_with_label(1), 1, cfg, sched);
  REQUIRE(trained.checkpoints.size() == 3);

  ForestConfig fc;
  fc.n_trees = 10;
  fc.max_depth = 8;
  const MarginalTrace trace = marginal_eval(1, trained.checkpoints, ds1, ds2, fc, 17);
  CHECK(trace.label == 1);
  REQUIRE(trace.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(trace.rows[i].tick == trained.checkpoints[i].tick);
    CHECK(trace.rows[i].epoch == trained.checkpoints[i].epoch);
    CHECK(trace.rows[i].l1 >= 0.0);
    CHECK(trace.rows[i].l1 <= 2.0);
    CHECK(trace.rows[i].jaccard >= 0.0);
    CHECK(trace.rows[i].jaccard <= 1.0);
    CHECK(trace.rows[i].f1_ds1 >= 0.0);
    CHECK(trace.rows[i].f1_ds1 <= 1.0);
    CHECK(trace.rows[i].f1_ds2 >= 0.0);
    CHECK(trace.rows[i].f1_ds2 <= 1.0);
  }

  const MarginalTrace again = marginal_eval(1, trained.checkpoints, ds1, ds2, fc, 17);
  CHECK(again.to_csv() == trace.to_csv());
}

TEST_CASE("replaying real rows through the joint pipeline matches a direct benchmark") {
  const LabeledDataset ds1 = two_label_gaussians(2000, 2.0, 93);
  const LabeledDataset ds2 = two_label_gaussians(2000, 2.0, 94);

  ForestConfig fc;
  fc.n_trees = 30;
  fc.max_depth = 12;
  fc.seed = 5;

  // direct: train on the real ds1, score on ds2
  const Forest direct = rf_train(ds1.features, ds1.labels, fc);
  const double benchmark =
      evaluate_classifier(direct, ds2.features, ds2.labels).at_default().macro_f1;

  // substituted: replay sources hand the same rows through joint_eval
  const std::vector<RowSource> src0 = {make_replay_source(ds1.rows_with_label(0))};
  const std::vector<RowSource> src1 = {make_replay_source(ds1.rows_with_label(1))};
  const JointSummary summary = joint_eval(src0, src1, SelectionStrategy{}, nullptr, nullptr, 3, 0,
                                          0, ds1, ds2, fc, 101);

  REQUIRE(summary.runs.size() == 3);
  for (double f1 : summary.macro_f1_at(0.5)) {
    CHECK(f1 == doctest::Approx(benchmark).epsilon(0.06));
    // 1 sigma of class separation bounds achievable macro-F1 around 0.84
    CHECK(f1 > 0.75);
    CHECK(f1 < 0.9);
  }
}

TEST_CASE("elitism restricts source choice to the top ranked ticks") {
  const LabeledDataset ds1 = two_label_gaussians(60, 3.0, 95);
  const LabeledDataset ds2 = two_label_gaussians(60, 3.0, 96);

  const std::vector<RowSource> src0 = {constant_source(1, 1), constant_source(2, 1),
                                       constant_source(3, 1)};
  const std::vector<RowSource> src1 = {constant_source(4, 1), constant_source(5, 1),
                                       constant_source(6, 1)};

  MarginalTrace m0, m1;
  m0.label = 0;
  m0.rows = {{1, 0.0, 0, 0, 0, 0.2}, {2, 0.0, 0, 0, 0, 0.9}, {3, 0.0, 0, 0, 0, 0.5}};
  m1.label = 1;
  m1.rows = {{4, 0.0, 0, 0, 0, 0.1}, {5, 0.0, 0, 0, 0, 0.3}, {6, 0.0, 0, 0, 0, 0.8}};

  ForestConfig fc;
  fc.n_trees = 3;
  fc.max_depth = 2;

  SelectionStrategy top1{SelectionKind::elitism_topk, 1};
  const JointSummary s1 = joint_eval(src0, src1, top1, &m0, &m1, 8, 10, 10, ds1, ds2, fc, 7);
  for (const auto& run : s1.runs) {
    CHECK(run.tick_label0 == 2);  // highest marginal f1_ds2 for label 0
    CHECK(run.tick_label1 == 6);
  }

  SelectionStrategy top2{SelectionKind::elitism_topk, 2};
  const JointSummary s2 = joint_eval(src0, src1, top2, &m0, &m1, 40, 10, 10, ds1, ds2, fc, 7);
  std::set<std::uint64_t> seen0, seen1;
  for (const auto& run : s2.runs) {
    CHECK((run.tick_label0 == 2 || run.tick_label0 == 3));
    CHECK((run.tick_label1 == 5 || run.tick_label1 == 6));
    seen0.insert(run.tick_label0);
    seen1.insert(run.tick_label1);
  }
  CHECK(seen0.size() == 2);  // 40 draws hit both pool members
  CHECK(seen1.size() == 2);

  // uniform selection roams over every source
  const JointSummary su =
      joint_eval(src0, src1, SelectionStrategy{}, nullptr, nullptr, 60, 10, 10, ds1, ds2, fc, 7);
  std::set<std::uint64_t> all0;
  for (const auto& run : su.runs) all0.insert(run.tick_label0);
  CHECK(all0.size() == 3);

  // a pool size beyond the trace clamps instead of failing
  SelectionStrategy top9{SelectionKind::elitism_topk, 9};
  CHECK_NOTHROW(joint_eval(src0, src1, top9, &m0, &m1, 2, 10, 10, ds1, ds2, fc, 7));

  // elitism without a trace is a configuration error
  CHECK_THROWS_AS(joint_eval(src0, src1, top1, nullptr, &m1, 2, 10, 10, ds1, ds2, fc, 7),
                  ConfigError);

  // a ranked tick with no matching source breaks the contract
  MarginalTrace orphan = m0;
  orphan.rows[1].tick = 99;
  CHECK_THROWS_AS(joint_eval(src0, src1, top1, &orphan, &m1, 2, 10, 10, ds1, ds2, fc, 7),
                  ContractError);
}

TEST_CASE("joint evaluation is reproducible and thread-count invariant") {
  const LabeledDataset ds1 = two_label_gaussians(150, 2.5, 97);
  const LabeledDataset ds2 = two_label_gaussians(150, 2.5, 98);
  const std::vector<RowSource> src0 = {make_replay_source(ds1.rows_with_label(0)),
                                       make_mean_baseline_source(ds1.rows_with_label(0))};
  const std::vector<RowSource> src1 = {make_replay_source(ds1.rows_with_label(1)),
                                       make_mean_baseline_source(ds1.rows_with_label(1))};

  ForestConfig fc;
  fc.n_trees = 8;
  fc.max_depth = 6;

  const JointSummary a =
      joint_eval(src0, src1, SelectionStrategy{}, nullptr, nullptr, 6, 0, 0, ds1, ds2, fc, 55, 1);
  const JointSummary b =
      joint_eval(src0, src1, SelectionStrategy{}, nullptr, nullptr, 6, 0, 0, ds1, ds2, fc, 55, 2);
  CHECK(a.to_json() == b.to_json());

  const JointSummary c =
      joint_eval(src0, src1, SelectionStrategy{}, nullptr, nullptr, 6, 0, 0, ds1, ds2, fc, 56, 1);
  CHECK(a.to_json() != c.to_json());

  CHECK(a.thresholds == std::vector<double>{0.2, 0.4, 0.5, 0.6, 0.8});
  CHECK(a.macro_f1_at(0.5).size() == 6);
  CHECK(a.best_macro_f1() >= a.best_default_macro_f1());
  CHECK_THROWS_AS(a.macro_f1_at(0.45), ContractError);
}

TEST_CASE("joint report emits a summary and one csv per threshold") {
  const LabeledDataset ds1 = two_label_gaussians(80, 2.0, 99);
  const LabeledDataset ds2 = two_label_gaussians(80, 2.0, 100);
  const std::vector<RowSource> src0 = {make_replay_source(ds1.rows_with_label(0))};
  const std::vector<RowSource> src1 = {make_replay_source(ds1.rows_with_label(1))};
  ForestConfig fc;
  fc.n_trees = 5;
  fc.max_depth = 4;
  const JointSummary summary =
      joint_eval(src0, src1, SelectionStrategy{}, nullptr, nullptr, 4, 0, 0, ds1, ds2, fc, 31);

  const std::string dir = "/tmp/stgan_test_report";
  std::filesystem::remove_all(dir);
  emit_joint_report(dir, summary);

  CHECK(std::filesystem::exists(dir + "/summary.json"));
  for (const char* name :
       {"macro_f1_threshold_0.2.csv", "macro_f1_threshold_0.4.csv", "macro_f1_threshold_0.5.csv",
        "macro_f1_threshold_0.6.csv", "macro_f1_threshold_0.8.csv"}) {
    CAPTURE(name);
    REQUIRE(std::filesystem::exists(dir + "/" + name));
  }
  const std::string csv = slurp(dir + "/macro_f1_threshold_0.5.csv");
  CHECK(csv.rfind("run,macro_f1\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

  const std::string first = slurp(dir + "/summary.json");
  emit_joint_report(dir, summary);
  CHECK(slurp(dir + "/summary.json") == first);  // byte-stable rewrite
  std::filesystem::remove_all(dir);
}
