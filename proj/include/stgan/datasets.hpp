#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "stgan/common.hpp"

namespace stgan {

struct NormalSpec {
  double mu;
  double sigma;
};
struct BinomialSpec {
  int n;
  double p;
};
struct ExponentialSpec {
  double scale;  // mean
};
struct PoissonSpec {
  double lambda;
};
struct DiscreteUniformSpec {
  int lo;
  int hi;  // inclusive
};
struct SnedecorFSpec {
  double d1;
  double d2;
};

using FeatureSpec = std::variant<NormalSpec, BinomialSpec, ExponentialSpec, PoissonSpec,
                                 DiscreteUniformSpec, SnedecorFSpec>;

double sample_feature(const FeatureSpec& spec, RngStream& rng);
std::string feature_spec_name(const FeatureSpec& spec);
FeatureSpec parse_feature_spec(const std::string& text);

// Chi-square draw via Marsaglia-Tsang gamma sampling; exposed for tests.
double sample_gamma(double shape, RngStream& rng);

struct LabeledDataset {
  Matrix features;             // n x d
  std::vector<int> labels;     // values in {0, 1}
  std::vector<std::string> feature_names;

  std::size_t n_rows() const { return labels.size(); }
  std::size_t n_features() const { return static_cast<std::size_t>(features.cols()); }
  std::size_t count_label(int label) const;
  Matrix rows_with_label(int label) const;
  std::vector<double> feature_column(std::size_t j) const;

  void validate() const;
};

// Draws rows_per_label[k] rows for label k, features independent across
// columns per that label's spec list. Label blocks are concatenated in label
// order; each label uses an independent substream of `seed`.
LabeledDataset render_dataset(const std::vector<std::vector<FeatureSpec>>& specs_per_label,
                              const std::vector<std::size_t>& rows_per_label,
                              std::uint64_t seed);

std::string dataset_to_csv(const LabeledDataset& ds);
LabeledDataset dataset_from_csv(const std::string& text);
void save_dataset_csv(const std::string& path, const LabeledDataset& ds);
LabeledDataset load_dataset_csv(const std::string& path);

// Random split into (first, second) with |first| ~ fraction * n. Stratified
// keeps per-label proportions within rounding; each present label needs at
// least 2 rows. Row order within each side preserves the input order.
std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& ds, double fraction,
                                                        std::uint64_t seed, bool stratified = true);

}  // namespace stgan
