#include "stgan/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace stgan {

namespace {

struct NodeRange {
  std::uint32_t begin;
  std::uint32_t end;
  std::int32_t node_index;
  std::int32_t depth;
};

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;
};

// One tree built over per-feature slot arrays kept sorted by feature value;
// partitions are stable so the order survives descent (presorted CART).
std::vector<TreeNode> build_tree(const Matrix& x, const std::vector<int>& y,
                                 const std::vector<std::vector<std::uint32_t>>& global_order,
                                 const ForestConfig& cfg, std::size_t k_features,
                                 std::uint64_t tree_seed) {
  const auto n = static_cast<std::uint32_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  RngStream rng(tree_seed);

  // bootstrap counts, then per-feature slot arrays with multiplicity
  std::vector<std::uint32_t> copies(n, 0);
  for (std::uint32_t i = 0; i < n; ++i) ++copies[rng.uniform_index(n)];
  std::vector<std::vector<std::uint32_t>> slots(d);
  for (std::size_t f = 0; f < d; ++f) {
    slots[f].reserve(n);
    for (std::uint32_t idx : global_order[f])
      for (std::uint32_t c = 0; c < copies[idx]; ++c) slots[f].push_back(idx);
  }
  const auto m = static_cast<std::uint32_t>(slots[0].size());
  std::vector<std::uint32_t> scratch(m);

  std::vector<TreeNode> nodes;
  nodes.emplace_back();
  std::vector<NodeRange> stack;
  stack.push_back({0, m, 0, 0});
  std::vector<std::size_t> feature_pool(d);

  while (!stack.empty()) {
    const NodeRange range = stack.back();
    stack.pop_back();
    const std::uint32_t size = range.end - range.begin;

    std::uint32_t count1 = 0;
    for (std::uint32_t s = range.begin; s < range.end; ++s) count1 += y[slots[0][s]] == 1;
    const std::uint32_t count0 = size - count1;

    auto make_leaf = [&]() {
      nodes[range.node_index].feature = -1;
      nodes[range.node_index].leaf_label = count1 > count0 ? 1 : 0;
    };

    const bool depth_capped = cfg.max_depth >= 0 && range.depth >= cfg.max_depth;
    if (count0 == 0 || count1 == 0 || size < cfg.min_samples_split || depth_capped) {
      make_leaf();
      continue;
    }

    // draw the feature subset for this node
    std::iota(feature_pool.begin(), feature_pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k_features; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.uniform_index(d - i));
      std::swap(feature_pool[i], feature_pool[j]);
    }
    std::sort(feature_pool.begin(), feature_pool.begin() + static_cast<std::ptrdiff_t>(k_features));

    SplitChoice best;
    const double total = static_cast<double>(size);
    for (std::size_t fi = 0; fi < k_features; ++fi) {
      const std::size_t f = feature_pool[fi];
      const auto& order = slots[f];
      std::uint32_t left1 = 0;
      for (std::uint32_t s = range.begin; s + 1 < range.end; ++s) {
        left1 += y[order[s]] == 1;
        const double v = x(order[s], static_cast<Eigen::Index>(f));
        const double v_next = x(order[s + 1], static_cast<Eigen::Index>(f));
        if (v_next <= v) continue;  // split only between distinct values
        const double nl = static_cast<double>(s + 1 - range.begin);
        const double nr = total - nl;
        const double l1 = static_cast<double>(left1);
        const double r1 = static_cast<double>(count1) - l1;
        // weighted Gini: sum over sides of n_side * (1 - p0^2 - p1^2)
        const double gl = nl - (l1 * l1 + (nl - l1) * (nl - l1)) / nl;
        const double gr = nr - (r1 * r1 + (nr - r1) * (nr - r1)) / nr;
        const double impurity = (gl + gr) / total;
        if (!best.found || impurity < best.impurity) {
          double mid = v + 0.5 * (v_next - v);
          if (!(mid > v)) mid = v_next;
          best = {true, f, mid, impurity};
        }
      }
    }

    if (!best.found) {
      make_leaf();
      continue;
    }

    // stable partition of every feature's slots by the chosen predicate
    const auto split_f = static_cast<Eigen::Index>(best.feature);
    std::uint32_t left_size = 0;
    for (std::size_t f = 0; f < d; ++f) {
      auto& order = slots[f];
      std::uint32_t lo = range.begin;
      std::uint32_t hi = 0;
      for (std::uint32_t s = range.begin; s < range.end; ++s) {
        if (x(order[s], split_f) < best.threshold)
          order[lo++] = order[s];
        else
          scratch[hi++] = order[s];
      }
      std::copy(scratch.begin(), scratch.begin() + hi, order.begin() + lo);
      left_size = lo - range.begin;
    }

    const auto left_index = static_cast<std::int32_t>(nodes.size());
    nodes.emplace_back();
    nodes.emplace_back();
    nodes[range.node_index].feature = static_cast<std::int32_t>(best.feature);
    nodes[range.node_index].threshold = best.threshold;
    nodes[range.node_index].left = left_index;
    nodes[range.node_index].right = left_index + 1;
    stack.push_back({range.begin + left_size, range.end, left_index + 1, range.depth + 1});
    stack.push_back({range.begin, range.begin + left_size, left_index, range.depth + 1});
  }
  return nodes;
}

}  // namespace

Forest rf_train(const Matrix& x, const std::vector<int>& y, const ForestConfig& cfg) {
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw DataError("rf_train: row count does not match label count");
  if (x.rows() == 0) throw DataError("rf_train: empty training set");
  if (cfg.n_trees == 0) throw ConfigError("rf_train: n_trees must be positive");
  for (int label : y)
    if (label != 0 && label != 1) throw DataError("rf_train: labels must be 0 or 1");

  const auto d = static_cast<std::size_t>(x.cols());
  std::size_t k = cfg.features_per_split;
  if (k == 0) k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  if (k > d) k = d;

  // global per-feature argsort shared by every tree
  std::vector<std::vector<std::uint32_t>> global_order(d);
  for (std::size_t f = 0; f < d; ++f) {
    auto& order = global_order[f];
    order.resize(static_cast<std::size_t>(x.rows()));
    std::iota(order.begin(), order.end(), 0u);
    const auto col = x.col(static_cast<Eigen::Index>(f));
    std::stable_sort(order.begin(), order.end(),
                     [&col](std::uint32_t a, std::uint32_t b) { return col(a) < col(b); });
  }

  Forest forest;
  forest.n_features = d;
  forest.trees.resize(cfg.n_trees);
  parallel_for(cfg.n_trees, cfg.threads, [&](std::size_t t) {
    const std::uint64_t tree_seed = derive_seed(cfg.seed, 3000 + t);
    forest.trees[t] = build_tree(x, y, global_order, cfg, k, tree_seed);
  });
  return forest;
}

std::vector<double> Forest::predict_proba(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != n_features)
    throw DataError("predict_proba: feature count mismatch");
  std::vector<double> proba(static_cast<std::size_t>(x.rows()), 0.0);
  for (const auto& tree : trees) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      std::int32_t node = 0;
      while (tree[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& nd = tree[static_cast<std::size_t>(node)];
        node = x(r, nd.feature) < nd.threshold ? nd.left : nd.right;
      }
      proba[static_cast<std::size_t>(r)] += tree[static_cast<std::size_t>(node)].leaf_label;
    }
  }
  const double inv = 1.0 / static_cast<double>(trees.size());
  for (double& p : proba) p *= inv;
  return proba;
}

double f1_score(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  const double denom = static_cast<double>(2 * tp + fp + fn);
  if (denom == 0.0) return 0.0;
  return 2.0 * static_cast<double>(tp) / denom;
}

double macro_f1_from_cm(const ConfusionMatrix& cm) {
  const double f1_pos = f1_score(cm.tp, cm.fp, cm.fn);
  const double f1_neg = f1_score(cm.tn, cm.fn, cm.fp);
  return 0.5 * (f1_pos + f1_neg);
}

ThresholdEntry score_at_threshold(const std::vector<double>& proba, const std::vector<int>& y,
                                  double threshold) {
  if (proba.size() != y.size()) throw DataError("score_at_threshold: size mismatch");
  ThresholdEntry e;
  e.threshold = threshold;
  for (std::size_t i = 0; i < proba.size(); ++i) {
    const bool pred1 = proba[i] >= threshold;
    if (y[i] == 1) {
      if (pred1)
        ++e.cm.tp;
      else
        ++e.cm.fn;
    } else {
      if (pred1)
        ++e.cm.fp;
      else
        ++e.cm.tn;
    }
  }
  e.f1_label1_defined = (e.cm.tp + e.cm.fn) > 0;
  e.f1_label0_defined = (e.cm.tn + e.cm.fp) > 0;
  e.f1_label1 = f1_score(e.cm.tp, e.cm.fp, e.cm.fn);
  e.f1_label0 = f1_score(e.cm.tn, e.cm.fn, e.cm.fp);
  e.macro_f1 = 0.5 * (e.f1_label1 + e.f1_label0);
  return e;
}

ClassifierReport evaluate_classifier(const Forest& forest, const Matrix& x,
                                     const std::vector<int>& y) {
  static const std::vector<double> thresholds = {0.2, 0.4, 0.5, 0.6, 0.8};
  const std::vector<double> proba = forest.predict_proba(x);
  ClassifierReport report;
  for (double t : thresholds) report.entries.push_back(score_at_threshold(proba, y, t));
  report.default_index = 2;
  report.best_index = 0;
  auto better = [&](std::size_t a, std::size_t b) {
    const auto& ea = report.entries[a];
    const auto& eb = report.entries[b];
    if (ea.macro_f1 != eb.macro_f1) return ea.macro_f1 > eb.macro_f1;
    const double da = std::abs(ea.threshold - 0.5);
    const double db = std::abs(eb.threshold - 0.5);
    if (da != db) return da < db;  // ties resolved toward the default threshold
    return ea.threshold < eb.threshold;
  };
  for (std::size_t i = 1; i < report.entries.size(); ++i)
    if (better(i, report.best_index)) report.best_index = i;
  return report;
}

std::string classifier_report_to_json(const ClassifierReport& report) {
  std::ostringstream out;
  out << "{\n  \"thresholds\": [\n";
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    const auto& e = report.entries[i];
    out << "    {\"threshold\": " << format_double(e.threshold) << ", \"tn\": " << e.cm.tn
        << ", \"fp\": " << e.cm.fp << ", \"fn\": " << e.cm.fn << ", \"tp\": " << e.cm.tp
        << ", \"f1_label1\": " << format_double(e.f1_label1)
        << ", \"f1_label0\": " << format_double(e.f1_label0)
        << ", \"macro_f1\": " << format_double(e.macro_f1) << "}";
    out << (i + 1 < report.entries.size() ? ",\n" : "\n");
  }
  out << "  ],\n";
  out << "  \"best_threshold\": " << format_double(report.best().threshold) << ",\n";
  out << "  \"best_macro_f1\": " << format_double(report.best().macro_f1) << ",\n";
  out << "  \"default_macro_f1\": " << format_double(report.at_default().macro_f1) << "\n";
  out << "}\n";
  return out.str();
}

}  // namespace stgan
