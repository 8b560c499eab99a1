#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stgan/common.hpp"

namespace stgan {

struct ForestConfig {
  std::size_t n_trees = 300;
  int max_depth = 20;  // -1 means unlimited
  std::size_t min_samples_split = 2;
  std::size_t features_per_split = 0;  // 0 means ceil(sqrt(d))
  std::uint64_t seed = 0;
  int threads = 1;
};

// Binary CART node; leaves store the majority label (tie -> 0).
struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int8_t leaf_label = 0;
};

struct Forest {
  std::vector<std::vector<TreeNode>> trees;
  std::size_t n_features = 0;

  // Fraction of trees voting label 1, one value per row.
  std::vector<double> predict_proba(const Matrix& x) const;
};

// Gini-impurity CART forest: bootstrap per tree, ceil(sqrt(d)) features per
// split by default, midpoint thresholds between adjacent distinct values,
// impurity ties broken toward the lower feature index.
Forest rf_train(const Matrix& x, const std::vector<int>& y, const ForestConfig& cfg);

struct ConfusionMatrix {
  std::uint64_t tn = 0, fp = 0, fn = 0, tp = 0;  // rows true (0,1), cols predicted (0,1)
};

struct ThresholdEntry {
  double threshold = 0.0;
  ConfusionMatrix cm;
  double f1_label1 = 0.0;
  double f1_label0 = 0.0;
  double macro_f1 = 0.0;
  bool f1_label1_defined = true;  // false when no true label-1 rows exist
  bool f1_label0_defined = true;
};

struct ClassifierReport {
  std::vector<ThresholdEntry> entries;  // ascending thresholds
  std::size_t best_index = 0;           // max macro-F1; ties resolved toward 0.5
  std::size_t default_index = 0;        // threshold 0.5

  const ThresholdEntry& best() const { return entries[best_index]; }
  const ThresholdEntry& at_default() const { return entries[default_index]; }
};

// F1 of the positive class given (tp, fp, fn); 0 when the denominator is 0.
double f1_score(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);

// Mean of the label-1 and label-0 F1 scores computed from one confusion
// matrix with label 1 positive.
double macro_f1_from_cm(const ConfusionMatrix& cm);

ThresholdEntry score_at_threshold(const std::vector<double>& proba, const std::vector<int>& y,
                                  double threshold);

// Scores at {0.2, 0.4, 0.5, 0.6, 0.8}; predict 1 iff proba >= threshold.
ClassifierReport evaluate_classifier(const Forest& forest, const Matrix& x,
                                     const std::vector<int>& y);

std::string classifier_report_to_json(const ClassifierReport& report);

}  // namespace stgan
