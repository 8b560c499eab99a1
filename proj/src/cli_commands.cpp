#include "stgan/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "stgan/hist.hpp"
#include "stgan/manifest.hpp"

namespace stgan::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string resolve_out_dir(const std::string& out) {
  if (out.empty()) throw ConfigError("output directory required (--out)");
  fs::path p(out);
  if (p.is_absolute()) return p.string();
  if (const char* root = std::getenv("STGAN_OUT_ROOT"); root && *root)
    return (fs::path(root) / p).string();
  return p.string();
}

std::string checkpoint_filename(std::uint64_t tick) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ckpt_%06llu.stgan", static_cast<unsigned long long>(tick));
  return buf;
}

std::vector<GeneratorCheckpoint> load_checkpoint_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".stgan")
      paths.push_back(entry.path().string());
  if (paths.empty()) throw DataError("no .stgan checkpoints in " + dir);
  std::sort(paths.begin(), paths.end());
  std::vector<GeneratorCheckpoint> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(GeneratorCheckpoint::load(p));
  std::sort(out.begin(), out.end(),
            [](const GeneratorCheckpoint& a, const GeneratorCheckpoint& b) {
              return a.tick < b.tick;
            });
  return out;
}

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json mlp_config_to_json(const MlpConfig& m) {
  return json{{"in_width", m.in_width},
              {"hidden_widths", m.hidden_widths},
              {"out_width", m.out_width},
              {"leaky_alpha", m.leaky_alpha},
              {"batch_norm", m.batch_norm},
              {"dropout", m.dropout},
              {"l2", m.l2},
              {"output", m.output == OutputActivationKind::smirnov ? "smirnov" : "linear"}};
}

json optimizer_to_json(const OptimizerConfig& o) {
  return json{{"kind", o.kind == OptimizerKind::adam ? "adam" : "rmsprop"},
              {"lr", o.lr},
              {"beta1", o.beta1},
              {"beta2", o.beta2},
              {"decay", o.decay},
              {"eps", o.eps}};
}

json gan_config_to_json(const GanConfig& g) {
  return json{{"gen", mlp_config_to_json(g.gen)},
              {"critic", mlp_config_to_json(g.critic)},
              {"gen_opt", optimizer_to_json(g.gen_opt)},
              {"critic_opt", optimizer_to_json(g.critic_opt)},
              {"latent",
               json{{"dim", g.latent.dim},
                    {"family", g.latent.family == LatentFamily::uniform ? "uniform" : "normal"},
                    {"std", g.latent.std}}},
              {"smirnov_knots", g.smirnov_knots},
              {"smirnov_clip", g.smirnov_clip},
              {"snap_discrete", g.snap_discrete}};
}

json schedule_to_json(const TrainSchedule& s) {
  return json{{"batch_size", s.batch_size},
              {"total_minibatches", s.total_minibatches},
              {"checkpoint_interval", s.checkpoint_interval},
              {"eval_interval", s.eval_interval},
              {"critic_steps", s.critic_steps},
              {"seed", s.seed},
              {"metric_samples", s.metric_samples},
              {"metric_bins", s.metric_bins}};
}

json forest_to_json(const ForestConfig& f) {
  return json{{"n_trees", f.n_trees},
              {"max_depth", f.max_depth},
              {"min_samples_split", f.min_samples_split},
              {"features_per_split", f.features_per_split},
              {"seed", f.seed},
              {"threads", f.threads}};
}

void apply_config_json(const json& j, GanConfig& gan, TrainSchedule& sched,
                       ForestConfig& forest) {
  if (!j.is_object()) throw ConfigError("config file: top level must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    try {
      if (key == "gen_hidden") {
        gan.gen.hidden_widths = v.get<std::vector<std::size_t>>();
      } else if (key == "critic_hidden") {
        gan.critic.hidden_widths = v.get<std::vector<std::size_t>>();
      } else if (key == "gen_lr") {
        gan.gen_opt.lr = v.get<double>();
      } else if (key == "critic_lr") {
        gan.critic_opt.lr = v.get<double>();
      } else if (key == "gen_l2") {
        gan.gen.l2 = v.get<double>();
      } else if (key == "critic_l2") {
        gan.critic.l2 = v.get<double>();
      } else if (key == "gen_dropout") {
        gan.gen.dropout = v.get<double>();
      } else if (key == "critic_dropout") {
        gan.critic.dropout = v.get<double>();
      } else if (key == "gen_alpha") {
        gan.gen.leaky_alpha = v.get<double>();
      } else if (key == "critic_alpha") {
        gan.critic.leaky_alpha = v.get<double>();
      } else if (key == "gen_batch_norm") {
        gan.gen.batch_norm = v.get<bool>();
      } else if (key == "critic_batch_norm") {
        gan.critic.batch_norm = v.get<bool>();
      } else if (key == "latent_dim") {
        gan.latent.dim = v.get<std::size_t>();
        gan.gen.in_width = gan.latent.dim;
      } else if (key == "latent_family") {
        const std::string fam = v.get<std::string>();
        if (fam == "uniform")
          gan.latent.family = LatentFamily::uniform;
        else if (fam == "normal")
          gan.latent.family = LatentFamily::normal;
        else
          throw ConfigError("config file: latent_family must be uniform or normal, got " + fam);
      } else if (key == "latent_std") {
        gan.latent.std = v.get<double>();
      } else if (key == "smirnov_knots") {
        gan.smirnov_knots = v.get<std::size_t>();
      } else if (key == "smirnov_clip") {
        gan.smirnov_clip = v.get<double>();
      } else if (key == "snap_discrete") {
        gan.snap_discrete = v.get<bool>();
      } else if (key == "batch_size") {
        sched.batch_size = v.get<std::size_t>();
      } else if (key == "total_minibatches") {
        sched.total_minibatches = v.get<std::size_t>();
      } else if (key == "checkpoint_interval") {
        sched.checkpoint_interval = v.get<std::size_t>();
      } else if (key == "eval_interval") {
        sched.eval_interval = v.get<std::size_t>();
      } else if (key == "critic_steps") {
        sched.critic_steps = v.get<std::size_t>();
      } else if (key == "metric_samples") {
        sched.metric_samples = v.get<std::size_t>();
      } else if (key == "metric_bins") {
        sched.metric_bins = v.get<std::size_t>();
      } else if (key == "forest_trees") {
        forest.n_trees = v.get<std::size_t>();
      } else if (key == "forest_depth") {
        forest.max_depth = v.get<int>();
      } else if (key == "forest_min_samples_split") {
        forest.min_samples_split = v.get<std::size_t>();
      } else if (key == "forest_features_per_split") {
        forest.features_per_split = v.get<std::size_t>();
      } else {
        throw ConfigError("config file: unknown key: " + key);
      }
    } catch (const json::exception& e) {
      throw ConfigError("config file: bad value for " + key + ": " + e.what());
    }
  }
}

json load_config_file(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IoError& e) {
    throw ConfigError(std::string("config file: ") + e.what());
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
}

std::vector<FeatureSpec> parse_spec_list(const std::vector<std::string>& texts,
                                         const char* flag) {
  std::vector<FeatureSpec> specs;
  specs.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    try {
      specs.push_back(parse_feature_spec(texts[i]));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(flag) + "[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return specs;
}

json spec_names_json(const std::vector<FeatureSpec>& specs) {
  json arr = json::array();
  for (const auto& s : specs) arr.push_back(feature_spec_name(s));
  return arr;
}

json threshold_entry_to_json(const ThresholdEntry& e) {
  return json{{"threshold", e.threshold},
              {"tn", e.cm.tn},
              {"fp", e.cm.fp},
              {"fn", e.cm.fn},
              {"tp", e.cm.tp},
              {"f1_label1", e.f1_label1},
              {"f1_label0", e.f1_label0},
              {"macro_f1", e.macro_f1},
              {"f1_label1_defined", e.f1_label1_defined},
              {"f1_label0_defined", e.f1_label0_defined}};
}

ThresholdEntry threshold_entry_from_json(const json& j) {
  ThresholdEntry e;
  e.threshold = j.at("threshold").get<double>();
  e.cm.tn = j.at("tn").get<std::uint64_t>();
  e.cm.fp = j.at("fp").get<std::uint64_t>();
  e.cm.fn = j.at("fn").get<std::uint64_t>();
  e.cm.tp = j.at("tp").get<std::uint64_t>();
  e.f1_label1 = j.at("f1_label1").get<double>();
  e.f1_label0 = j.at("f1_label0").get<double>();
  e.macro_f1 = j.at("macro_f1").get<double>();
  e.f1_label1_defined = j.at("f1_label1_defined").get<bool>();
  e.f1_label0_defined = j.at("f1_label0_defined").get<bool>();
  return e;
}

std::string joint_summary_to_runs_json(const JointSummary& summary) {
  json j;
  j["thresholds"] = summary.thresholds;
  json runs = json::array();
  for (const auto& r : summary.runs) {
    json entries = json::array();
    for (const auto& e : r.report.entries) entries.push_back(threshold_entry_to_json(e));
    runs.push_back(json{{"run", r.run},
                        {"tick_label0", r.tick_label0},
                        {"tick_label1", r.tick_label1},
                        {"best_index", r.report.best_index},
                        {"default_index", r.report.default_index},
                        {"entries", std::move(entries)}});
  }
  j["runs"] = std::move(runs);
  return j.dump(2) + "\n";
}

void write_manifest(const std::string& dir, const std::string& command, json config,
                    std::uint64_t seed, std::vector<std::string> artifacts, int threads,
                    double wall_seconds) {
  RunManifest m;
  m.command = command;
  m.config = std::move(config);
  m.seed = seed;
  m.artifacts = std::move(artifacts);
  m.threads = threads;
  m.wall_seconds = wall_seconds;
  m.write(dir);
}

SelectionStrategy parse_strategy(const std::string& text) {
  SelectionStrategy s;
  if (text == "uniform") {
    s.kind = SelectionKind::uniform_all;
    return s;
  }
  if (text.rfind("top", 0) == 0) {
    const std::string digits = text.substr(3);
    if (!digits.empty() &&
        std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); })) {
      const unsigned long k = std::strtoul(digits.c_str(), nullptr, 10);
      if (k >= 1) {
        s.kind = SelectionKind::elitism_topk;
        s.k = k;
        return s;
      }
    }
  }
  throw ConfigError("unknown strategy (expected uniform or top<k>): " + text);
}

void check_checkpoint_labels(const std::vector<GeneratorCheckpoint>& ckpts, int label,
                             const std::string& dir) {
  for (const auto& c : ckpts)
    if (c.label != label)
      throw DataError("checkpoint " + dir + "/" + checkpoint_filename(c.tick) + " has label " +
                      std::to_string(c.label) + ", expected " + std::to_string(label));
}

}  // namespace

int cmd_render(const RenderArgs& args) {
  Stopwatch watch;
  const Preset preset = preset_by_name(args.preset);

  if (args.spec0.empty() != args.spec1.empty())
    throw ConfigError("feature overrides must cover both labels (--spec0 and --spec1)");

  std::vector<std::vector<FeatureSpec>> specs;
  if (!args.spec0.empty()) {
    specs = {parse_spec_list(args.spec0, "--spec0"), parse_spec_list(args.spec1, "--spec1")};
  } else if (args.preset == "flows") {
    throw ConfigError(
        "preset flows models external data and has no rendering distributions; "
        "pass --spec0/--spec1");
  } else {
    specs = rendered_feature_specs();
  }

  std::size_t rows = args.rows ? args.rows : preset.default_rows_per_label;
  if (rows == 0) throw ConfigError("rows per label must be positive (--rows)");

  const LabeledDataset ds = render_dataset(specs, {rows, rows}, args.seed);

  const std::string dir = resolve_out_dir(args.out);
  const std::string csv_name = args.name + ".csv";
  save_dataset_csv((fs::path(dir) / csv_name).string(), ds);

  json config{{"preset", args.preset},
              {"rows_per_label", rows},
              {"name", args.name},
              {"label0_specs", spec_names_json(specs[0])},
              {"label1_specs", spec_names_json(specs[1])}};
  write_manifest(dir, "render", std::move(config), args.seed, {csv_name}, 1, watch.seconds());
  std::cout << "wrote " << (fs::path(dir) / csv_name).string() << " (" << ds.n_rows()
            << " rows)\n";
  return 0;
}

int cmd_train(const TrainArgs& args) {
  Stopwatch watch;
  if (args.label != 0 && args.label != 1)
    throw ConfigError("label must be 0 or 1, got " + std::to_string(args.label));
  if (args.minibatches && args.epochs)
    throw ConfigError("--minibatches and --epochs are mutually exclusive");

  const Preset preset = preset_by_name(args.preset);
  GanConfig gan = args.label == 0 ? preset.gan_label0 : preset.gan_label1;
  TrainSchedule schedule = preset.schedule;
  ForestConfig trace_forest = preset.trace_forest;

  if (!args.config_file.empty())
    apply_config_json(load_config_file(args.config_file), gan, schedule, trace_forest);

  if (args.activation == "smirnov")
    gan.gen.output = OutputActivationKind::smirnov;
  else if (args.activation == "linear")
    gan.gen.output = OutputActivationKind::linear;
  else
    throw ConfigError("activation must be smirnov or linear, got " + args.activation);

  if (args.batch) schedule.batch_size = *args.batch;
  if (args.minibatches) schedule.total_minibatches = *args.minibatches;
  if (args.checkpoint_interval) schedule.checkpoint_interval = *args.checkpoint_interval;
  if (args.eval_interval) schedule.eval_interval = *args.eval_interval;
  if (args.critic_steps) schedule.critic_steps = *args.critic_steps;
  if (args.metric_samples) schedule.metric_samples = *args.metric_samples;
  if (args.metric_bins) schedule.metric_bins = *args.metric_bins;
  schedule.seed = args.seed;
  trace_forest.threads = args.threads;

  const LabeledDataset ds1 = load_dataset_csv(args.data);
  const Matrix real = ds1.rows_with_label(args.label);
  if (real.rows() == 0)
    throw DataError("dataset " + args.data + " has no rows with label " +
                    std::to_string(args.label));

  if (args.epochs) {
    const std::size_t mpe =
        (static_cast<std::size_t>(real.rows()) + schedule.batch_size - 1) / schedule.batch_size;
    schedule.total_minibatches = *args.epochs * mpe;
  }

  EvalHook hook;
  LabeledDataset ds2;
  if (!args.eval_data.empty()) {
    ds2 = load_dataset_csv(args.eval_data);
    const std::uint64_t master = args.seed;
    const int label = args.label;
    hook = [&ds1, &ds2, trace_forest, master, label](const GeneratorCheckpoint& ckpt) {
      const MarginalTrace t =
          marginal_eval(label, {ckpt}, ds1, ds2, trace_forest, master);
      return std::make_pair(t.rows.at(0).f1_ds1, t.rows.at(0).f1_ds2);
    };
  }

  const TrainResult result = wgan_train(real, args.label, gan, schedule, hook);

  const std::string dir = resolve_out_dir(args.out);
  fs::create_directories(dir);
  std::vector<std::string> artifacts;
  write_text_file((fs::path(dir) / "trace.csv").string(), result.trace.to_csv());
  artifacts.push_back("trace.csv");
  for (const auto& ckpt : result.checkpoints) {
    const std::string name = checkpoint_filename(ckpt.tick);
    ckpt.save((fs::path(dir) / name).string());
    artifacts.push_back(name);
  }
  if (gan.gen.output == OutputActivationKind::smirnov && !result.checkpoints.empty()) {
    const auto* acts = result.checkpoints.front().generator.output_activations();
    if (acts) {
      for (std::size_t j = 0; j < acts->size(); ++j) {
        const std::string name = "activation_f" + std::to_string(j) + ".csv";
        write_text_file((fs::path(dir) / name).string(), (*acts)[j].to_csv());
        artifacts.push_back(name);
      }
    }
  }

  json config{{"preset", args.preset},
              {"label", args.label},
              {"activation", args.activation},
              {"data", args.data},
              {"eval_data", args.eval_data},
              {"gan", gan_config_to_json(gan)},
              {"schedule", schedule_to_json(schedule)}};
  if (!args.eval_data.empty()) config["trace_forest"] = forest_to_json(trace_forest);
  write_manifest(dir, "train", std::move(config), args.seed, std::move(artifacts), args.threads,
                 watch.seconds());
  std::cout << "trained label " << args.label << " (" << args.activation << ") for "
            << schedule.total_minibatches << " minibatches; " << result.checkpoints.size()
            << " checkpoints -> " << dir << "\n";
  return 0;
}

int cmd_eval_marginal(const EvalMarginalArgs& args) {
  Stopwatch watch;
  if (args.label != 0 && args.label != 1)
    throw ConfigError("label must be 0 or 1, got " + std::to_string(args.label));
  const Preset preset = preset_by_name(args.preset);
  ForestConfig forest = preset.trace_forest;
  if (args.trees) forest.n_trees = *args.trees;
  if (args.depth) forest.max_depth = *args.depth;
  forest.threads = args.threads;

  const LabeledDataset ds1 = load_dataset_csv(args.data);
  const LabeledDataset ds2 = load_dataset_csv(args.eval_data);
  const std::vector<GeneratorCheckpoint> ckpts = load_checkpoint_dir(args.ckpt_dir);
  check_checkpoint_labels(ckpts, args.label, args.ckpt_dir);

  const MarginalTrace trace =
      marginal_eval(args.label, ckpts, ds1, ds2, forest, args.seed, args.bins);

  const std::string dir = resolve_out_dir(args.out);
  write_text_file((fs::path(dir) / "marginal.csv").string(), trace.to_csv());

  json config{{"preset", args.preset}, {"label", args.label},    {"data", args.data},
              {"eval_data", args.eval_data}, {"ckpt_dir", args.ckpt_dir},
              {"bins", args.bins},      {"forest", forest_to_json(forest)}};
  write_manifest(dir, "eval-marginal", std::move(config), args.seed, {"marginal.csv"},
                 args.threads, watch.seconds());
  std::cout << "marginal trace for label " << args.label << ": " << trace.rows.size()
            << " checkpoints -> " << dir << "\n";
  return 0;
}

int cmd_eval_joint(const EvalJointArgs& args) {
  Stopwatch watch;
  const Preset preset = preset_by_name(args.preset);
  ForestConfig forest = preset.forest;
  if (args.trees) forest.n_trees = *args.trees;
  if (args.depth) forest.max_depth = *args.depth;
  forest.threads = 1;  // run-level parallelism instead

  const SelectionStrategy strategy = parse_strategy(args.strategy);

  const LabeledDataset ds1 = load_dataset_csv(args.data);
  const LabeledDataset ds2 = load_dataset_csv(args.eval_data);

  std::vector<RowSource> sources0, sources1;
  MarginalTrace marg0, marg1;
  const MarginalTrace* marg0_ptr = nullptr;
  const MarginalTrace* marg1_ptr = nullptr;

  if (args.mode == "gan") {
    if (args.ckpt_dir0.empty() || args.ckpt_dir1.empty())
      throw ConfigError("mode gan requires --ckpt-dir0 and --ckpt-dir1");
    const auto ckpts0 = load_checkpoint_dir(args.ckpt_dir0);
    const auto ckpts1 = load_checkpoint_dir(args.ckpt_dir1);
    check_checkpoint_labels(ckpts0, 0, args.ckpt_dir0);
    check_checkpoint_labels(ckpts1, 1, args.ckpt_dir1);
    sources0 = make_checkpoint_sources(ckpts0);
    sources1 = make_checkpoint_sources(ckpts1);
    if (strategy.kind == SelectionKind::elitism_topk) {
      if (args.marginal0.empty() || args.marginal1.empty())
        throw ConfigError("strategy " + args.strategy +
                          " requires --marginal0 and --marginal1 trace CSVs");
      marg0 = MarginalTrace::from_csv(read_text_file(args.marginal0), 0);
      marg1 = MarginalTrace::from_csv(read_text_file(args.marginal1), 1);
      marg0_ptr = &marg0;
      marg1_ptr = &marg1;
    }
  } else if (args.mode == "replay" || args.mode == "mean-baseline") {
    if (strategy.kind == SelectionKind::elitism_topk)
      throw ConfigError("strategy " + args.strategy + " only applies to mode gan");
    const Matrix real0 = ds1.rows_with_label(0);
    const Matrix real1 = ds1.rows_with_label(1);
    if (args.mode == "replay") {
      sources0 = {make_replay_source(real0)};
      sources1 = {make_replay_source(real1)};
    } else {
      sources0 = {make_mean_baseline_source(real0, args.noise_scale)};
      sources1 = {make_mean_baseline_source(real1, args.noise_scale)};
    }
  } else {
    throw ConfigError("mode must be gan, replay, or mean-baseline, got " + args.mode);
  }

  const JointSummary summary =
      joint_eval(sources0, sources1, strategy, marg0_ptr, marg1_ptr, args.runs, args.n0, args.n1,
                 ds1, ds2, forest, args.seed, args.threads);

  const std::string dir = resolve_out_dir(args.out);
  emit_joint_report(dir, summary);
  write_text_file((fs::path(dir) / "runs.json").string(), joint_summary_to_runs_json(summary));

  std::vector<std::string> artifacts{"summary.json", "runs.json"};
  for (const double t : summary.thresholds) {
    std::ostringstream name;
    name << "macro_f1_threshold_" << format_double(t) << ".csv";
    artifacts.push_back(name.str());
  }

  json config{{"preset", args.preset},
              {"mode", args.mode},
              {"strategy", args.strategy},
              {"runs", args.runs},
              {"n0", args.n0},
              {"n1", args.n1},
              {"noise_scale", args.noise_scale},
              {"data", args.data},
              {"eval_data", args.eval_data},
              {"ckpt_dir0", args.ckpt_dir0},
              {"ckpt_dir1", args.ckpt_dir1},
              {"forest", forest_to_json(forest)}};
  write_manifest(dir, "eval-joint", std::move(config), args.seed, std::move(artifacts),
                 args.threads, watch.seconds());

  std::cout << "joint eval (" << args.mode << ", " << args.strategy << "): " << summary.runs.size()
            << " runs, default-threshold mean macro-F1 "
            << format_double(series_mean(summary.macro_f1_at(0.5))) << " -> " << dir << "\n";
  return 0;
}

int cmd_metrics(const MetricsArgs& args) {
  Stopwatch watch;
  const LabeledDataset a = load_dataset_csv(args.data_a);
  const LabeledDataset b = load_dataset_csv(args.data_b);
  const Matrix ma = args.label_a >= 0 ? a.rows_with_label(args.label_a) : a.features;
  const Matrix mb = args.label_b >= 0 ? b.rows_with_label(args.label_b) : b.features;
  if (ma.rows() == 0) throw DataError("no rows selected from " + args.data_a);
  if (mb.rows() == 0) throw DataError("no rows selected from " + args.data_b);

  const GridSpec grid = build_grid(ma, mb, args.bins);
  const HistogramGrid ha = build_histogram(grid, ma);
  const HistogramGrid hb = build_histogram(grid, mb);
  bool both_empty = false;
  const double l1 = l1_distance(ha, hb);
  const double jac = jaccard_index(ha, hb, &both_empty);

  const std::string dir = resolve_out_dir(args.out);
  fs::create_directories(dir);
  std::vector<std::string> artifacts;

  json metrics{{"l1", l1},
               {"jaccard", jac},
               {"jaccard_both_empty", both_empty},
               {"cubes_a", ha.counts.size()},
               {"cubes_b", hb.counts.size()},
               {"rows_a", ha.n_rows},
               {"rows_b", hb.n_rows},
               {"out_of_range_a", ha.out_of_range},
               {"out_of_range_b", hb.out_of_range},
               {"bins_per_dim", args.bins}};
  write_text_file((fs::path(dir) / "metrics.json").string(), metrics.dump(2) + "\n");
  artifacts.push_back("metrics.json");

  write_text_file((fs::path(dir) / "series.csv").string(),
                  series_to_csv(flatten_sorted_series(ha, hb)));
  artifacts.push_back("series.csv");

  if (args.kde) {
    for (std::size_t j = 0; j < static_cast<std::size_t>(ma.cols()); ++j) {
      std::vector<double> col_a(ma.rows()), col_b(mb.rows());
      for (Eigen::Index i = 0; i < ma.rows(); ++i) col_a[i] = ma(i, j);
      for (Eigen::Index i = 0; i < mb.rows(); ++i) col_b[i] = mb(i, j);
      const std::string name_a = "kde_a_f" + std::to_string(j) + ".csv";
      const std::string name_b = "kde_b_f" + std::to_string(j) + ".csv";
      write_text_file((fs::path(dir) / name_a).string(),
                      kde_to_csv(kde_series(col_a, args.bandwidth)));
      write_text_file((fs::path(dir) / name_b).string(),
                      kde_to_csv(kde_series(col_b, args.bandwidth)));
      artifacts.push_back(name_a);
      artifacts.push_back(name_b);
    }
  }

  json config{{"data_a", args.data_a}, {"data_b", args.data_b}, {"label_a", args.label_a},
              {"label_b", args.label_b}, {"bins", args.bins},   {"kde", args.kde},
              {"bandwidth", args.bandwidth}};
  write_manifest(dir, "metrics", std::move(config), 0, std::move(artifacts), 1, watch.seconds());

  std::cout << "l1 " << format_double(l1) << ", jaccard " << format_double(jac) << " -> " << dir
            << "\n";
  return 0;
}

JointSummary joint_summary_from_runs_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("runs.json: ") + e.what());
  }
  JointSummary summary;
  try {
    summary.thresholds = j.at("thresholds").get<std::vector<double>>();
    for (const json& rj : j.at("runs")) {
      JointRun run;
      run.run = rj.at("run").get<std::size_t>();
      run.tick_label0 = rj.at("tick_label0").get<std::uint64_t>();
      run.tick_label1 = rj.at("tick_label1").get<std::uint64_t>();
      run.report.best_index = rj.at("best_index").get<std::size_t>();
      run.report.default_index = rj.at("default_index").get<std::size_t>();
      for (const json& ej : rj.at("entries"))
        run.report.entries.push_back(threshold_entry_from_json(ej));
      if (run.report.best_index >= run.report.entries.size() ||
          run.report.default_index >= run.report.entries.size())
        throw FormatError("runs.json: entry index out of range");
      summary.runs.push_back(std::move(run));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("runs.json: ") + e.what());
  }
  return summary;
}

int cmd_report(const ReportArgs& args) {
  Stopwatch watch;
  const JointSummary summary = joint_summary_from_runs_json(read_text_file(args.runs_file));
  if (summary.runs.empty()) throw DataError("runs.json holds no runs");

  const std::string dir = resolve_out_dir(args.out);
  emit_joint_report(dir, summary);

  std::vector<std::string> artifacts{"summary.json"};
  std::cout << "runs: " << summary.runs.size() << "\n";
  std::cout << "threshold  mean      median    iqr       max\n";
  for (const double t : summary.thresholds) {
    const std::vector<double> values = summary.macro_f1_at(t);
    char line[128];
    std::snprintf(line, sizeof(line), "%-10.2f %-9.6f %-9.6f %-9.6f %-9.6f\n", t,
                  series_mean(values), series_quantile(values, 0.5), series_iqr(values),
                  *std::max_element(values.begin(), values.end()));
    std::cout << line;
    std::ostringstream name;
    name << "macro_f1_threshold_" << format_double(t) << ".csv";
    artifacts.push_back(name.str());
  }
  std::cout << "best macro-F1 over runs and thresholds: " << format_double(summary.best_macro_f1())
            << "\n";

  json config{{"runs_file", args.runs_file}};
  write_manifest(dir, "report", std::move(config), 0, std::move(artifacts), 1, watch.seconds());
  return 0;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"per-label WGAN with empirical-quantile output activations for tabular data"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  RenderArgs render_args;
  auto* render = app.add_subcommand("render", "draw a labeled dataset from named distributions");
  render->add_option("--preset", render_args.preset, "rendered | flows | rendered-desk");
  render->add_option("--spec0", render_args.spec0,
                     "label-0 feature distribution, repeatable, e.g. normal(0,1)");
  render->add_option("--spec1", render_args.spec1, "label-1 feature distribution, repeatable");
  render->add_option("--rows", render_args.rows, "rows per label (0 = preset default)");
  render->add_option("--seed", render_args.seed, "master seed");
  render->add_option("--out", render_args.out, "output directory")->required();
  render->add_option("--name", render_args.name, "dataset file basename");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train one label's generator adversarially");
  train->add_option("--data", train_args.data, "training dataset CSV")->required();
  train->add_option("--eval-data", train_args.eval_data,
                    "held-out CSV; enables nested-classifier F1 at eval ticks");
  train->add_option("--label", train_args.label, "class label to model")->required();
  train->add_option("--activation", train_args.activation, "smirnov | linear");
  train->add_option("--preset", train_args.preset, "hyperparameter preset");
  train->add_option("--config", train_args.config_file, "JSON overrides file");
  train->add_option("--minibatches", train_args.minibatches, "total minibatches");
  train->add_option("--epochs", train_args.epochs, "training length in epochs");
  train->add_option("--batch", train_args.batch, "minibatch size");
  train->add_option("--checkpoint-interval", train_args.checkpoint_interval,
                    "minibatches per checkpoint");
  train->add_option("--eval-interval", train_args.eval_interval,
                    "minibatches between nested-F1 evaluations");
  train->add_option("--critic-steps", train_args.critic_steps, "critic updates per generator step");
  train->add_option("--metric-samples", train_args.metric_samples,
                    "synthetic rows per per-tick histogram comparison (0 = real count)");
  train->add_option("--metric-bins", train_args.metric_bins, "histogram bins per dimension");
  train->add_option("--seed", train_args.seed, "master seed");
  train->add_option("--threads", train_args.threads, "worker threads for nested evaluation");
  train->add_option("--out", train_args.out, "output directory")->required();

  EvalMarginalArgs marginal_args;
  auto* emarg = app.add_subcommand("eval-marginal",
                                   "score each checkpoint by mixing its rows with real data");
  emarg->add_option("--data", marginal_args.data, "GAN training dataset CSV (DS1)")->required();
  emarg->add_option("--eval-data", marginal_args.eval_data, "held-out dataset CSV (DS2)")
      ->required();
  emarg->add_option("--ckpt-dir", marginal_args.ckpt_dir, "checkpoint directory")->required();
  emarg->add_option("--label", marginal_args.label, "label the checkpoints model")->required();
  emarg->add_option("--preset", marginal_args.preset, "forest preset");
  emarg->add_option("--trees", marginal_args.trees, "forest size");
  emarg->add_option("--depth", marginal_args.depth, "tree depth cap (-1 = unlimited)");
  emarg->add_option("--bins", marginal_args.bins, "histogram bins per dimension");
  emarg->add_option("--seed", marginal_args.seed, "master seed");
  emarg->add_option("--threads", marginal_args.threads, "forest worker threads");
  emarg->add_option("--out", marginal_args.out, "output directory")->required();

  EvalJointArgs joint_args;
  auto* ejoint = app.add_subcommand(
      "eval-joint", "train classifiers on fully synthetic data, test on held-out real data");
  ejoint->add_option("--data", joint_args.data, "GAN training dataset CSV (DS1)")->required();
  ejoint->add_option("--eval-data", joint_args.eval_data, "held-out dataset CSV (DS2)")
      ->required();
  ejoint->add_option("--ckpt-dir0", joint_args.ckpt_dir0, "label-0 checkpoint directory");
  ejoint->add_option("--ckpt-dir1", joint_args.ckpt_dir1, "label-1 checkpoint directory");
  ejoint->add_option("--marginal0", joint_args.marginal0, "label-0 marginal trace CSV");
  ejoint->add_option("--marginal1", joint_args.marginal1, "label-1 marginal trace CSV");
  ejoint->add_option("--strategy", joint_args.strategy, "uniform | top<k>");
  ejoint->add_option("--mode", joint_args.mode, "gan | replay | mean-baseline");
  ejoint->add_option("--noise-scale", joint_args.noise_scale,
                     "mean-baseline noise, in feature standard deviations");
  ejoint->add_option("--runs", joint_args.runs, "independent evaluation runs");
  ejoint->add_option("--n0", joint_args.n0, "synthetic label-0 rows (0 = DS1 count)");
  ejoint->add_option("--n1", joint_args.n1, "synthetic label-1 rows (0 = DS1 count)");
  ejoint->add_option("--preset", joint_args.preset, "forest preset");
  ejoint->add_option("--trees", joint_args.trees, "forest size");
  ejoint->add_option("--depth", joint_args.depth, "tree depth cap (-1 = unlimited)");
  ejoint->add_option("--seed", joint_args.seed, "master seed");
  ejoint->add_option("--threads", joint_args.threads, "concurrent runs");
  ejoint->add_option("--out", joint_args.out, "output directory")->required();

  MetricsArgs metrics_args;
  auto* metrics = app.add_subcommand("metrics", "histogram distances between two datasets");
  metrics->add_option("--data-a", metrics_args.data_a, "reference dataset CSV")->required();
  metrics->add_option("--data-b", metrics_args.data_b, "comparison dataset CSV")->required();
  metrics->add_option("--label-a", metrics_args.label_a, "restrict A to one label (-1 = all)");
  metrics->add_option("--label-b", metrics_args.label_b, "restrict B to one label (-1 = all)");
  metrics->add_option("--bins", metrics_args.bins, "histogram bins per dimension");
  metrics->add_flag("--kde", metrics_args.kde, "emit per-feature density series");
  metrics->add_option("--bandwidth", metrics_args.bandwidth, "KDE bandwidth (0 = Silverman)");
  metrics->add_option("--out", metrics_args.out, "output directory")->required();

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "re-emit report files from stored run records");
  report->add_option("--runs", report_args.runs_file, "runs.json from eval-joint")->required();
  report->add_option("--out", report_args.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(render)) return cmd_render(render_args);
    if (app.got_subcommand(train)) return cmd_train(train_args);
    if (app.got_subcommand(emarg)) return cmd_eval_marginal(marginal_args);
    if (app.got_subcommand(ejoint)) return cmd_eval_joint(joint_args);
    if (app.got_subcommand(metrics)) return cmd_metrics(metrics_args);
    if (app.got_subcommand(report)) return cmd_report(report_args);
    throw ConfigError("no subcommand given");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace stgan::cli
