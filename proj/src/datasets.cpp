#include "stgan/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace stgan {

namespace {

int sample_binomial(int n, double p, RngStream& rng) {
  if (n < 0 || p < 0.0 || p > 1.0) throw ConfigError("binomial: invalid parameters");
  if (p == 0.0) return 0;
  if (p == 1.0) return n;
  // inversion through the recurrent pmf
  const double u = rng.uniform01();
  const double ratio = p / (1.0 - p);
  double pmf = std::pow(1.0 - p, n);
  double cum = pmf;
  int k = 0;
  while (u >= cum && k < n) {
    pmf *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
    ++k;
    cum += pmf;
  }
  return k;
}

int sample_poisson(double lambda, RngStream& rng) {
  if (!(lambda > 0.0)) throw ConfigError("poisson: lambda must be positive");
  const double u = rng.uniform01();
  double pmf = std::exp(-lambda);
  double cum = pmf;
  int k = 0;
  while (u >= cum && k < 10000) {
    pmf *= lambda / static_cast<double>(k + 1);
    ++k;
    cum += pmf;
  }
  return k;
}

}  // namespace

double sample_gamma(double shape, RngStream& rng) {
  if (!(shape > 0.0)) throw ConfigError("gamma: shape must be positive");
  if (shape < 1.0) {
    const double u = rng.uniform01();
    return sample_gamma(shape + 1.0, rng) * std::pow(u > 0.0 ? u : 1e-300, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = rng.normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = rng.uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_feature(const FeatureSpec& spec, RngStream& rng) {
  return std::visit(
      [&rng](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NormalSpec>) {
          return rng.normal(s.mu, s.sigma);
        } else if constexpr (std::is_same_v<T, BinomialSpec>) {
          return static_cast<double>(sample_binomial(s.n, s.p, rng));
        } else if constexpr (std::is_same_v<T, ExponentialSpec>) {
          return -s.scale * std::log1p(-rng.uniform01());
        } else if constexpr (std::is_same_v<T, PoissonSpec>) {
          return static_cast<double>(sample_poisson(s.lambda, rng));
        } else if constexpr (std::is_same_v<T, DiscreteUniformSpec>) {
          if (s.hi < s.lo) throw ConfigError("discrete_uniform: hi < lo");
          const auto span = static_cast<std::uint64_t>(s.hi - s.lo) + 1;
          return static_cast<double>(s.lo) + static_cast<double>(rng.uniform_index(span));
        } else {
          // Snedecor F as a ratio of scaled chi-square draws
          const double chi1 = 2.0 * sample_gamma(s.d1 / 2.0, rng);
          const double chi2 = 2.0 * sample_gamma(s.d2 / 2.0, rng);
          if (chi2 == 0.0) throw NumericError("snedecor_f: zero denominator draw");
          return (chi1 / s.d1) / (chi2 / s.d2);
        }
      },
      spec);
}

namespace {

std::string fmt_param(double v) { return format_double(v); }

std::vector<double> parse_params(const std::string& text, std::size_t lparen) {
  const auto rparen = text.rfind(')');
  if (rparen == std::string::npos || rparen < lparen)
    throw ConfigError("feature spec missing closing parenthesis: " + text);
  std::vector<double> out;
  std::string inner = text.substr(lparen + 1, rparen - lparen - 1);
  std::stringstream ss(inner);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str()) throw ConfigError("bad numeric parameter in feature spec: " + text);
    out.push_back(v);
  }
  return out;
}

}  // namespace

std::string feature_spec_name(const FeatureSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NormalSpec>)
          return "normal(" + fmt_param(s.mu) + "," + fmt_param(s.sigma) + ")";
        else if constexpr (std::is_same_v<T, BinomialSpec>)
          return "binomial(" + std::to_string(s.n) + "," + fmt_param(s.p) + ")";
        else if constexpr (std::is_same_v<T, ExponentialSpec>)
          return "exponential(" + fmt_param(s.scale) + ")";
        else if constexpr (std::is_same_v<T, PoissonSpec>)
          return "poisson(" + fmt_param(s.lambda) + ")";
        else if constexpr (std::is_same_v<T, DiscreteUniformSpec>)
          return "discrete_uniform(" + std::to_string(s.lo) + "," + std::to_string(s.hi) + ")";
        else
          return "snedecor_f(" + fmt_param(s.d1) + "," + fmt_param(s.d2) + ")";
      },
      spec);
}

FeatureSpec parse_feature_spec(const std::string& text) {
  const auto lparen = text.find('(');
  if (lparen == std::string::npos) throw ConfigError("feature spec needs parameters: " + text);
  std::string name = text.substr(0, lparen);
  name.erase(0, name.find_first_not_of(" \t"));
  name.erase(name.find_last_not_of(" \t") + 1);
  const std::vector<double> p = parse_params(text, lparen);
  auto need = [&](std::size_t n) {
    if (p.size() != n)
      throw ConfigError("feature spec " + name + " expects " + std::to_string(n) + " parameters");
  };
  auto require = [&](bool cond, const char* what) {
    if (!cond) throw ConfigError("feature spec " + name + ": " + what);
  };
  if (name == "normal") {
    need(2);
    require(p[1] > 0.0, "sigma must be positive");
    return NormalSpec{p[0], p[1]};
  }
  if (name == "binomial") {
    need(2);
    require(p[0] >= 1.0, "n must be at least 1");
    require(p[1] >= 0.0 && p[1] <= 1.0, "p must lie in [0, 1]");
    return BinomialSpec{static_cast<int>(p[0]), p[1]};
  }
  if (name == "exponential") {
    need(1);
    require(p[0] > 0.0, "mean must be positive");
    return ExponentialSpec{p[0]};
  }
  if (name == "poisson") {
    need(1);
    require(p[0] > 0.0, "lambda must be positive");
    return PoissonSpec{p[0]};
  }
  if (name == "discrete_uniform") {
    need(2);
    require(p[1] >= p[0], "hi must not be below lo");
    return DiscreteUniformSpec{static_cast<int>(p[0]), static_cast<int>(p[1])};
  }
  if (name == "snedecor_f") {
    need(2);
    require(p[0] > 0.0 && p[1] > 0.0, "degrees of freedom must be positive");
    return SnedecorFSpec{p[0], p[1]};
  }
  throw ConfigError("unknown feature spec: " + name);
}

std::size_t LabeledDataset::count_label(int label) const {
  std::size_t c = 0;
  for (int l : labels)
    if (l == label) ++c;
  return c;
}

Matrix LabeledDataset::rows_with_label(int label) const {
  const std::size_t c = count_label(label);
  Matrix out(static_cast<Eigen::Index>(c), features.cols());
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) out.row(r++) = features.row(static_cast<Eigen::Index>(i));
  return out;
}

std::vector<double> LabeledDataset::feature_column(std::size_t j) const {
  std::vector<double> col(n_rows());
  for (std::size_t i = 0; i < col.size(); ++i)
    col[i] = features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return col;
}

void LabeledDataset::validate() const {
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw DataError("dataset: row count does not match label count");
  if (!feature_names.empty() && feature_names.size() != n_features())
    throw DataError("dataset: feature name count does not match feature count");
  for (int l : labels)
    if (l != 0 && l != 1) throw DataError("dataset: labels must be 0 or 1");
  if (!features.allFinite()) throw DataError("dataset: non-finite feature value");
}

LabeledDataset render_dataset(const std::vector<std::vector<FeatureSpec>>& specs_per_label,
                              const std::vector<std::size_t>& rows_per_label,
                              std::uint64_t seed) {
  if (specs_per_label.empty()) throw ConfigError("render_dataset: no label specs");
  if (specs_per_label.size() != rows_per_label.size())
    throw ConfigError("render_dataset: specs and row counts disagree on label count");
  if (specs_per_label.size() > 2) throw ConfigError("render_dataset: labels are binary");
  const std::size_t d = specs_per_label[0].size();
  if (d == 0) throw ConfigError("render_dataset: no features");
  for (const auto& specs : specs_per_label)
    if (specs.size() != d)
      throw ConfigError("render_dataset: labels disagree on feature count");

  std::size_t total = 0;
  for (std::size_t n : rows_per_label) total += n;
  LabeledDataset ds;
  ds.features.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(d));
  ds.labels.reserve(total);
  ds.feature_names.resize(d);
  for (std::size_t j = 0; j < d; ++j) ds.feature_names[j] = "f" + std::to_string(j);

  Eigen::Index row = 0;
  for (std::size_t label = 0; label < specs_per_label.size(); ++label) {
    RngStream rng(derive_seed(seed, 1000 + label));
    for (std::size_t i = 0; i < rows_per_label[label]; ++i) {
      for (std::size_t j = 0; j < d; ++j)
        ds.features(row, static_cast<Eigen::Index>(j)) =
            sample_feature(specs_per_label[label][j], rng);
      ds.labels.push_back(static_cast<int>(label));
      ++row;
    }
  }
  return ds;
}

std::string dataset_to_csv(const LabeledDataset& ds) {
  ds.validate();
  std::ostringstream out;
  for (std::size_t j = 0; j < ds.n_features(); ++j) {
    out << (ds.feature_names.empty() ? "f" + std::to_string(j) : ds.feature_names[j]);
    out << ',';
  }
  out << "label\n";
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    for (std::size_t j = 0; j < ds.n_features(); ++j)
      out << format_double(ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))
          << ',';
    out << ds.labels[i] << '\n';
  }
  return out.str();
}

LabeledDataset dataset_from_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) throw FormatError("csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, ',')) header.push_back(tok);
  }
  if (header.size() < 2 || header.back() != "label")
    throw FormatError("csv: header must end with a 'label' column");
  const std::size_t d = header.size() - 1;

  LabeledDataset ds;
  ds.feature_names.assign(header.begin(), header.end() - 1);
  std::vector<double> values;
  std::size_t line_no = 1;
  std::size_t n = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string tok;
    std::vector<std::string> cells;
    while (std::getline(ls, tok, ',')) cells.push_back(tok);
    if (cells.size() != d + 1)
      throw FormatError("csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(d + 1) + " cells, got " + std::to_string(cells.size()));
    for (std::size_t j = 0; j < d; ++j) {
      char* end = nullptr;
      const double v = std::strtod(cells[j].c_str(), &end);
      if (end == cells[j].c_str() || *end != '\0' || !std::isfinite(v))
        throw FormatError("csv line " + std::to_string(line_no) + ": bad numeric cell '" +
                          cells[j] + "'");
      values.push_back(v);
    }
    if (cells[d] == "0")
      ds.labels.push_back(0);
    else if (cells[d] == "1")
      ds.labels.push_back(1);
    else
      throw FormatError("csv line " + std::to_string(line_no) + ": label must be 0 or 1, got '" +
                        cells[d] + "'");
    ++n;
  }
  ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * d + j];
  return ds;
}

void save_dataset_csv(const std::string& path, const LabeledDataset& ds) {
  write_text_file(path, dataset_to_csv(ds));
}

LabeledDataset load_dataset_csv(const std::string& path) {
  return dataset_from_csv(read_text_file(path));
}

namespace {

LabeledDataset take_rows(const LabeledDataset& ds, const std::vector<std::size_t>& idx) {
  LabeledDataset out;
  out.feature_names = ds.feature_names;
  out.features.resize(static_cast<Eigen::Index>(idx.size()), ds.features.cols());
  out.labels.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) =
        ds.features.row(static_cast<Eigen::Index>(idx[i]));
    out.labels.push_back(ds.labels[idx[i]]);
  }
  return out;
}

}  // namespace

std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& ds, double fraction,
                                                        std::uint64_t seed, bool stratified) {
  ds.validate();
  if (!(fraction > 0.0) || !(fraction < 1.0))
    throw ConfigError("split_dataset: fraction must lie strictly in (0, 1)");
  if (ds.n_rows() < 2) throw DataError("split_dataset: need at least 2 rows");

  std::vector<std::size_t> first_idx;
  std::vector<std::size_t> second_idx;
  if (stratified) {
    for (int label : {0, 1}) {
      std::vector<std::size_t> pool;
      for (std::size_t i = 0; i < ds.n_rows(); ++i)
        if (ds.labels[i] == label) pool.push_back(i);
      if (pool.empty()) continue;
      if (pool.size() < 2)
        throw DataError("split_dataset: label " + std::to_string(label) +
                        " has fewer than 2 rows");
      RngStream rng(derive_seed(seed, 2000 + static_cast<std::uint64_t>(label)));
      rng.shuffle(pool);
      const auto take = static_cast<std::size_t>(
          std::floor(fraction * static_cast<double>(pool.size()) + 0.5));
      for (std::size_t i = 0; i < pool.size(); ++i)
        (i < take ? first_idx : second_idx).push_back(pool[i]);
    }
  } else {
    std::vector<std::size_t> pool(ds.n_rows());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    RngStream rng(derive_seed(seed, 2001));
    rng.shuffle(pool);
    const auto take =
        static_cast<std::size_t>(std::floor(fraction * static_cast<double>(pool.size()) + 0.5));
    for (std::size_t i = 0; i < pool.size(); ++i)
      (i < take ? first_idx : second_idx).push_back(pool[i]);
  }
  std::sort(first_idx.begin(), first_idx.end());
  std::sort(second_idx.begin(), second_idx.end());
  return {take_rows(ds, first_idx), take_rows(ds, second_idx)};
}

}  // namespace stgan
