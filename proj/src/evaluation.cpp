#include "stgan/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "stgan/hist.hpp"

namespace stgan {

RowSource make_checkpoint_source(const GeneratorCheckpoint& ckpt) {
  RowSource src;
  src.tick = ckpt.tick;
  src.generate = [ckpt](std::size_t n, std::uint64_t seed) {
    return generate_rows(ckpt, n, seed);
  };
  return src;
}

std::vector<RowSource> make_checkpoint_sources(const std::vector<GeneratorCheckpoint>& ckpts) {
  std::vector<RowSource> out;
  out.reserve(ckpts.size());
  for (const auto& c : ckpts) out.push_back(make_checkpoint_source(c));
  return out;
}

RowSource make_replay_source(const Matrix& rows) {
  if (rows.rows() == 0) throw DataError("make_replay_source: no rows");
  RowSource src;
  src.tick = 0;
  src.generate = [rows](std::size_t n, std::uint64_t seed) {
    RngStream rng(seed);
    const auto avail = static_cast<std::size_t>(rows.rows());
    Matrix out(static_cast<Eigen::Index>(n), rows.cols());
    if (n <= avail) {
      std::vector<std::uint32_t> idx(avail);
      std::iota(idx.begin(), idx.end(), 0u);
      rng.shuffle(idx);
      for (std::size_t i = 0; i < n; ++i)
        out.row(static_cast<Eigen::Index>(i)) = rows.row(static_cast<Eigen::Index>(idx[i]));
    } else {
      for (std::size_t i = 0; i < n; ++i)
        out.row(static_cast<Eigen::Index>(i)) =
            rows.row(static_cast<Eigen::Index>(rng.uniform_index(avail)));
    }
    return out;
  };
  return src;
}

RowSource make_mean_baseline_source(const Matrix& real_rows, double noise_scale) {
  RowSource src;
  src.tick = 0;
  const Matrix rows = real_rows;
  src.generate = [rows, noise_scale](std::size_t n, std::uint64_t seed) {
    return mean_baseline_rows(rows, n, seed, noise_scale);
  };
  return src;
}

std::string MarginalTrace::to_csv() const {
  std::ostringstream out;
  out << "tick,epoch,l1,jaccard,f1_ds1,f1_ds2\n";
  for (const auto& r : rows)
    out << r.tick << ',' << format_double(r.epoch) << ',' << format_double(r.l1) << ','
        << format_double(r.jaccard) << ',' << format_double(r.f1_ds1) << ','
        << format_double(r.f1_ds2) << '\n';
  return out.str();
}

MarginalTrace MarginalTrace::from_csv(const std::string& text, int label) {
  MarginalTrace trace;
  trace.label = label;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("marginal trace: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "tick,epoch,l1,jaccard,f1_ds1,f1_ds2")
    throw FormatError("marginal trace: unexpected header: " + line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<std::string, 6> cells;
    std::size_t start = 0;
    for (std::size_t c = 0; c < 6; ++c) {
      const std::size_t comma = line.find(',', start);
      const bool last = (c == 5);
      if (last != (comma == std::string::npos))
        throw FormatError("marginal trace line " + std::to_string(line_no) +
                          ": expected 6 cells");
      cells[c] = line.substr(start, comma == std::string::npos ? std::string::npos
                                                               : comma - start);
      start = comma + 1;
    }
    auto to_double = [&](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end != s.c_str() + s.size() || s.empty())
        throw FormatError("marginal trace line " + std::to_string(line_no) +
                          ": bad number: " + s);
      return v;
    };
    MarginalRow row;
    row.tick = static_cast<std::uint64_t>(to_double(cells[0]));
    row.epoch = to_double(cells[1]);
    row.l1 = to_double(cells[2]);
    row.jaccard = to_double(cells[3]);
    row.f1_ds1 = to_double(cells[4]);
    row.f1_ds2 = to_double(cells[5]);
    trace.rows.push_back(row);
  }
  return trace;
}

namespace {

struct MixedSet {
  Matrix x;
  std::vector<int> y;
};

// synthetic rows of `label` stacked over real other-label rows
MixedSet mix_synthetic_with_real(const Matrix& synth, int label, const Matrix& real_other) {
  MixedSet set;
  set.x.resize(synth.rows() + real_other.rows(), synth.cols());
  set.x.topRows(synth.rows()) = synth;
  set.x.bottomRows(real_other.rows()) = real_other;
  set.y.assign(static_cast<std::size_t>(synth.rows()), label);
  set.y.insert(set.y.end(), static_cast<std::size_t>(real_other.rows()), 1 - label);
  return set;
}

double default_macro_f1(const Forest& forest, const LabeledDataset& ds) {
  const ClassifierReport report = evaluate_classifier(forest, ds.features, ds.labels);
  return report.at_default().macro_f1;
}

}  // namespace

MarginalTrace marginal_eval(int label, const std::vector<GeneratorCheckpoint>& ckpts,
                            const LabeledDataset& ds1, const LabeledDataset& ds2,
                            const ForestConfig& forest_cfg, std::uint64_t seed,
                            std::size_t bins_per_dim) {
  if (label != 0 && label != 1) throw ConfigError("marginal_eval: label must be 0 or 1");
  ds1.validate();
  ds2.validate();
  const Matrix real_label = ds1.rows_with_label(label);
  const Matrix real_other = ds1.rows_with_label(1 - label);
  if (real_label.rows() == 0 || real_other.rows() == 0)
    throw DataError("marginal_eval: ds1 must hold rows of both labels");

  MarginalTrace trace;
  trace.label = label;
  trace.rows.reserve(ckpts.size());
  for (std::size_t i = 0; i < ckpts.size(); ++i) {
    const auto& ckpt = ckpts[i];
    const auto n_label = static_cast<std::size_t>(real_label.rows());
    const Matrix synth = generate_rows(ckpt, n_label, derive_seed(seed, 20000 + ckpt.tick));

    const HistMetricPair hm = compute_hist_metrics(real_label, synth, bins_per_dim);

    const MixedSet train = mix_synthetic_with_real(synth, label, real_other);
    ForestConfig fc = forest_cfg;
    fc.seed = derive_seed(seed, 30000 + ckpt.tick);
    const Forest forest = rf_train(train.x, train.y, fc);

    MarginalRow row;
    row.tick = ckpt.tick;
    row.epoch = ckpt.epoch;
    row.l1 = hm.l1;
    row.jaccard = hm.jaccard;
    row.f1_ds1 = default_macro_f1(forest, ds1);
    row.f1_ds2 = default_macro_f1(forest, ds2);
    trace.rows.push_back(row);
  }
  return trace;
}

std::vector<double> JointSummary::macro_f1_at(double threshold) const {
  std::vector<double> out;
  out.reserve(runs.size());
  for (const auto& run : runs) {
    bool found = false;
    for (const auto& e : run.report.entries) {
      if (e.threshold == threshold) {
        out.push_back(e.macro_f1);
        found = true;
        break;
      }
    }
    if (!found) throw ContractError("JointSummary: threshold not present in report");
  }
  return out;
}

double JointSummary::best_macro_f1() const {
  double best = 0.0;
  for (const auto& run : runs)
    for (const auto& e : run.report.entries) best = std::max(best, e.macro_f1);
  return best;
}

double JointSummary::best_default_macro_f1() const {
  double best = 0.0;
  for (const auto& run : runs) best = std::max(best, run.report.at_default().macro_f1);
  return best;
}

double series_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DataError("series_quantile: empty series");
  if (q < 0.0 || q > 1.0) throw ConfigError("series_quantile: q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

double series_mean(const std::vector<double>& values) {
  if (values.empty()) throw DataError("series_mean: empty series");
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

double series_iqr(const std::vector<double>& values) {
  return series_quantile(values, 0.75) - series_quantile(values, 0.25);
}

namespace {

// elitism pool: indices of the k sources with the highest marginal DS2
// macro-F1 (ties toward the earlier tick); only ticks present in the trace
// are eligible
std::vector<std::size_t> elitism_pool(const std::vector<RowSource>& sources,
                                      const MarginalTrace* trace, std::size_t k,
                                      const char* which) {
  if (!trace)
    throw ConfigError(std::string("joint_eval: elitism needs a marginal trace for ") + which);
  std::vector<std::pair<double, std::uint64_t>> ranked;  // (f1, tick)
  for (const auto& row : trace->rows) ranked.push_back({row.f1_ds2, row.tick});
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (k == 0) throw ConfigError("joint_eval: elitism pool size must be positive");
  if (k > ranked.size()) k = ranked.size();
  std::vector<std::size_t> pool;
  for (std::size_t r = 0; r < k; ++r) {
    const std::uint64_t tick = ranked[r].second;
    bool found = false;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      if (sources[i].tick == tick) {
        pool.push_back(i);
        found = true;
        break;
      }
    }
    if (!found)
      throw ContractError("joint_eval: marginal trace tick " + std::to_string(tick) +
                          " has no matching source");
  }
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

JointSummary joint_eval(const std::vector<RowSource>& sources_label0,
                        const std::vector<RowSource>& sources_label1,
                        const SelectionStrategy& strategy,
                        const MarginalTrace* marginal_label0,
                        const MarginalTrace* marginal_label1, std::size_t runs, std::size_t n0,
                        std::size_t n1, const LabeledDataset& ds1, const LabeledDataset& ds2,
                        const ForestConfig& forest_cfg, std::uint64_t seed, int threads) {
  if (sources_label0.empty() || sources_label1.empty())
    throw ConfigError("joint_eval: need at least one source per label");
  if (runs == 0) throw ConfigError("joint_eval: runs must be positive");
  ds2.validate();
  if (n0 == 0) n0 = ds1.count_label(0);
  if (n1 == 0) n1 = ds1.count_label(1);
  if (n0 == 0 || n1 == 0)
    throw DataError("joint_eval: per-label row counts must be positive");

  std::vector<std::size_t> pool0(sources_label0.size());
  std::iota(pool0.begin(), pool0.end(), std::size_t{0});
  std::vector<std::size_t> pool1(sources_label1.size());
  std::iota(pool1.begin(), pool1.end(), std::size_t{0});
  if (strategy.kind == SelectionKind::elitism_topk) {
    pool0 = elitism_pool(sources_label0, marginal_label0, strategy.k, "label 0");
    pool1 = elitism_pool(sources_label1, marginal_label1, strategy.k, "label 1");
  }

  JointSummary summary;
  summary.thresholds = {0.2, 0.4, 0.5, 0.6, 0.8};
  summary.runs.resize(runs);
  parallel_for(runs, threads, [&](std::size_t r) {
    RngStream rng(derive_seed(seed, 40000 + r));
    const std::size_t i0 = pool0[rng.uniform_index(pool0.size())];
    const std::size_t i1 = pool1[rng.uniform_index(pool1.size())];
    const Matrix synth0 = sources_label0[i0].generate(n0, derive_seed(seed, 50000 + 2 * r));
    const Matrix synth1 = sources_label1[i1].generate(n1, derive_seed(seed, 50000 + 2 * r + 1));

    MixedSet train;
    train.x.resize(synth0.rows() + synth1.rows(), synth0.cols());
    train.x.topRows(synth0.rows()) = synth0;
    train.x.bottomRows(synth1.rows()) = synth1;
    train.y.assign(static_cast<std::size_t>(synth0.rows()), 0);
    train.y.insert(train.y.end(), static_cast<std::size_t>(synth1.rows()), 1);

    ForestConfig fc = forest_cfg;
    fc.seed = derive_seed(seed, 60000 + r);
    const Forest forest = rf_train(train.x, train.y, fc);

    JointRun& run = summary.runs[r];
    run.run = r;
    run.tick_label0 = sources_label0[i0].tick;
    run.tick_label1 = sources_label1[i1].tick;
    run.report = evaluate_classifier(forest, ds2.features, ds2.labels);
  });
  return summary;
}

StopDecision stopping_check(const std::vector<double>& f1_series, std::size_t window,
                            double epsilon) {
  if (window == 0) throw ConfigError("stopping_check: window must be positive");
  if (epsilon < 0.0) throw ConfigError("stopping_check: epsilon must be non-negative");
  StopDecision decision;
  if (f1_series.empty()) return decision;

  double best = f1_series[0];
  std::size_t best_pos = 0;
  for (std::size_t t = window; t < f1_series.size(); ++t) {
    double recent = f1_series[t];
    for (std::size_t i = t - window + 1; i < t; ++i) recent = std::max(recent, f1_series[i]);
    double earlier = f1_series[0];
    for (std::size_t i = 1; i + window <= t; ++i) earlier = std::max(earlier, f1_series[i]);
    if (recent < earlier + epsilon) {
      for (std::size_t i = 0; i <= t; ++i) {
        if (f1_series[i] > best) {
          best = f1_series[i];
          best_pos = i;
        }
      }
      decision.stopped = true;
      decision.stop_position = t;
      decision.best_position = best_pos;
      return decision;
    }
  }
  for (std::size_t i = 0; i < f1_series.size(); ++i) {
    if (f1_series[i] > best) {
      best = f1_series[i];
      best_pos = i;
    }
  }
  decision.best_position = best_pos;
  return decision;
}

std::string JointSummary::to_json() const {
  std::ostringstream out;
  out << "{\n  \"runs\": " << runs.size() << ",\n";
  out << "  \"thresholds\": [";
  for (std::size_t i = 0; i < thresholds.size(); ++i)
    out << (i ? ", " : "") << format_double(thresholds[i]);
  out << "],\n  \"per_threshold\": [\n";
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const std::vector<double> series = macro_f1_at(thresholds[i]);
    out << "    {\"threshold\": " << format_double(thresholds[i])
        << ", \"mean\": " << format_double(series_mean(series))
        << ", \"median\": " << format_double(series_quantile(series, 0.5))
        << ", \"iqr\": " << format_double(series_iqr(series))
        << ", \"max\": " << format_double(*std::max_element(series.begin(), series.end()))
        << "}" << (i + 1 < thresholds.size() ? ",\n" : "\n");
  }
  out << "  ],\n";
  out << "  \"best_macro_f1\": " << format_double(best_macro_f1()) << ",\n";
  out << "  \"best_default_macro_f1\": " << format_double(best_default_macro_f1()) << "\n}\n";
  return out.str();
}

void emit_joint_report(const std::string& dir, const JointSummary& summary) {
  std::filesystem::create_directories(dir);
  write_text_file(dir + "/summary.json", summary.to_json());
  for (double t : summary.thresholds) {
    const std::vector<double> series = summary.macro_f1_at(t);
    std::ostringstream csv;
    csv << "run,macro_f1\n";
    for (std::size_t r = 0; r < series.size(); ++r)
      csv << r << ',' << format_double(series[r]) << '\n';
    std::ostringstream name;
    name << dir << "/macro_f1_threshold_" << format_double(t) << ".csv";
    write_text_file(name.str(), csv.str());
  }
}

}  // namespace stgan
