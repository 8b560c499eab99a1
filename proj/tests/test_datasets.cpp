#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "stgan/datasets.hpp"

using namespace stgan;

namespace {

std::vector<double> draw(const FeatureSpec& spec, std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = sample_feature(spec, rng);
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST_CASE("samplers match their distribution moments") {
  const std::size_t n = 200000;

  SUBCASE("normal") {
    const auto v = draw(NormalSpec{3.0, 2.0}, n, 1);
    CHECK(mean_of(v) == doctest::Approx(3.0).epsilon(0.01));
    CHECK(sd_of(v) == doctest::Approx(2.0).epsilon(0.01));
  }
  SUBCASE("binomial") {
    const auto v = draw(BinomialSpec{15, 0.3}, n, 2);
    CHECK(mean_of(v) == doctest::Approx(15 * 0.3).epsilon(0.01));
    for (std::size_t i = 0; i < 500; ++i) {
      CHECK(v[i] == std::floor(v[i]));
      CHECK(v[i] >= 0.0);
      CHECK(v[i] <= 15.0);
    }
    // P(X = 0) = 0.7^15
    std::size_t zeros = 0;
    for (double x : v)
      if (x == 0.0) ++zeros;
    CHECK(static_cast<double>(zeros) / static_cast<double>(n) ==
          doctest::Approx(0.004747561509943).epsilon(0.15));
  }
  SUBCASE("exponential with mean 3") {
    const auto v = draw(ExponentialSpec{3.0}, n, 3);
    CHECK(mean_of(v) == doctest::Approx(3.0).epsilon(0.02));
    CHECK(sd_of(v) == doctest::Approx(3.0).epsilon(0.02));
    for (double x : v) REQUIRE(x >= 0.0);
  }
  SUBCASE("poisson") {
    const auto v = draw(PoissonSpec{1.0}, n, 4);
    CHECK(mean_of(v) == doctest::Approx(1.0).epsilon(0.02));
    std::size_t zeros = 0;
    for (double x : v)
      if (x == 0.0) ++zeros;
    // P(X = 0) = exp(-1)
    CHECK(static_cast<double>(zeros) / static_cast<double>(n) ==
          doctest::Approx(0.367879441171442322).epsilon(0.02));
  }
  SUBCASE("discrete uniform") {
    const auto v = draw(DiscreteUniformSpec{0, 15}, n, 5);
    CHECK(mean_of(v) == doctest::Approx(7.5).epsilon(0.01));
    std::set<double> values(v.begin(), v.end());
    CHECK(values.size() == 16);
    CHECK(*values.begin() == 0.0);
    CHECK(*values.rbegin() == 15.0);
  }
  SUBCASE("snedecor f") {
    const auto v = draw(SnedecorFSpec{3.0, 3.0}, n, 6);
    for (double x : v) REQUIRE(x >= 0.0);
    // F(3,3) has median exactly 1
    std::size_t below = 0;
    for (double x : v)
      if (x < 1.0) ++below;
    CHECK(static_cast<double>(below) / static_cast<double>(n) ==
          doctest::Approx(0.5).epsilon(0.02));
  }
}

TEST_CASE("gamma sampler has the right mean and variance") {
  RngStream rng(7);
  const double shape = 1.5;  // chi-square with 3 dof is gamma(1.5, 2)
  std::vector<double> v(100000);
  for (auto& x : v) x = 2.0 * sample_gamma(shape, rng);
  CHECK(mean_of(v) == doctest::Approx(3.0).epsilon(0.02));
  CHECK(sd_of(v) == doctest::Approx(std::sqrt(6.0)).epsilon(0.03));
}

TEST_CASE("feature spec parsing round-trips and rejects junk") {
  const std::vector<std::string> names = {
      "normal(0,1)",           "normal(-2.5,0.75)", "binomial(15,0.3)", "exponential(3)",
      "poisson(2)",            "discrete_uniform(0,15)", "snedecor_f(3,3)",
  };
  for (const auto& name : names) {
    const FeatureSpec spec = parse_feature_spec(name);
    CHECK(feature_spec_name(spec) == name);
    // reparse of the canonical name gives the same spec again
    CHECK(feature_spec_name(parse_feature_spec(feature_spec_name(spec))) == name);
  }

  CHECK(feature_spec_name(parse_feature_spec(" normal( 0 , 1 ) ")) == "normal(0,1)");

  CHECK_THROWS_AS(parse_feature_spec("triangle(1,2)"), ConfigError);
  CHECK_THROWS_AS(parse_feature_spec("normal(0)"), ConfigError);
  CHECK_THROWS_AS(parse_feature_spec("normal(0,1,2)"), ConfigError);
  CHECK_THROWS_AS(parse_feature_spec("normal(0,-1)"), ConfigError);
  CHECK_THROWS_AS(parse_feature_spec("binomial(0,0.5)"), ConfigError);
  CHECK_THROWS_AS(parse_feature_spec("binomial(10,1.5)"), ConfigError);
  CHECK_THROWS_AS(parse_feature_spec("exponential(-1)"), ConfigError);
  CHECK_THROWS_AS(parse_feature_spec("poisson(0)"), ConfigError);
  CHECK_THROWS_AS(parse_feature_spec("discrete_uniform(5,4)"), ConfigError);
  CHECK_THROWS_AS(parse_feature_spec("snedecor_f(0,3)"), ConfigError);
  CHECK_THROWS_AS(parse_feature_spec("normal(a,1)"), ConfigError);
  CHECK_THROWS_AS(parse_feature_spec(""), ConfigError);
  CHECK_THROWS_AS(parse_feature_spec("normal 0,1"), ConfigError);
}

TEST_CASE("render produces label blocks with per-label distributions") {
  const std::vector<std::vector<FeatureSpec>> specs = {
      {NormalSpec{0.0, 1.0}, PoissonSpec{1.0}},
      {NormalSpec{5.0, 1.0}, PoissonSpec{4.0}},
  };
  const LabeledDataset ds = render_dataset(specs, {3000, 2000}, 11);
  REQUIRE(ds.n_rows() == 5000);
  REQUIRE(ds.n_features() == 2);
  CHECK(ds.count_label(0) == 3000);
  CHECK(ds.count_label(1) == 2000);
  CHECK(ds.feature_names.size() == 2);

  // label blocks are contiguous, label 0 first
  for (std::size_t i = 0; i < 3000; ++i) REQUIRE(ds.labels[i] == 0);
  for (std::size_t i = 3000; i < 5000; ++i) REQUIRE(ds.labels[i] == 1);

  const Matrix block0 = ds.rows_with_label(0);
  const Matrix block1 = ds.rows_with_label(1);
  CHECK(std::fabs(block0.col(0).mean()) < 0.1);
  CHECK(block1.col(0).mean() == doctest::Approx(5.0).epsilon(0.02));
  CHECK(block0.col(1).mean() == doctest::Approx(1.0).epsilon(0.1));
  CHECK(block1.col(1).mean() == doctest::Approx(4.0).epsilon(0.05));

  // determinism: same seed renders the same bytes, another seed differs
  const LabeledDataset again = render_dataset(specs, {3000, 2000}, 11);
  CHECK(ds.features == again.features);
  const LabeledDataset other = render_dataset(specs, {3000, 2000}, 12);
  CHECK(ds.features != other.features);

  // label substreams are independent: growing label 0 leaves label 1 intact
  const LabeledDataset wider = render_dataset(specs, {4000, 2000}, 11);
  CHECK(wider.rows_with_label(1) == block1);
}

TEST_CASE("csv round-trip is exact") {
  const std::vector<std::vector<FeatureSpec>> specs = {
      {NormalSpec{0.0, 1.0}, ExponentialSpec{2.0}},
      {NormalSpec{1.0, 3.0}, ExponentialSpec{0.5}},
  };
  const LabeledDataset ds = render_dataset(specs, {40, 25}, 21);
  const std::string csv = dataset_to_csv(ds);
  const LabeledDataset back = dataset_from_csv(csv);
  REQUIRE(back.n_rows() == ds.n_rows());
  CHECK(back.features == ds.features);  // bit-exact via shortest round-trip formatting
  CHECK(back.labels == ds.labels);
  CHECK(back.feature_names == ds.feature_names);
  CHECK(dataset_to_csv(back) == csv);

  // header carries feature names then the label column
  CHECK(csv.substr(0, csv.find('\n')) == "f0,f1,label");
}

TEST_CASE("csv parser reports offending line numbers") {
  CHECK_THROWS_AS(dataset_from_csv(""), FormatError);
  CHECK_THROWS_WITH_AS(dataset_from_csv("f0,label\n1.5,2\n"), doctest::Contains("line 2"),
                       FormatError);
  CHECK_THROWS_WITH_AS(dataset_from_csv("f0,label\n1.5\n"), doctest::Contains("line 2"),
                       FormatError);
  CHECK_THROWS_WITH_AS(dataset_from_csv("f0,label\n1.5,0\nx,1\n"), doctest::Contains("line 3"),
                       FormatError);
  CHECK_THROWS_AS(dataset_from_csv("label\n0\n"), FormatError);  // no feature columns
  CHECK_THROWS_AS(load_dataset_csv("/nonexistent/path.csv"), IoError);
}

TEST_CASE("split keeps per-label proportions and input order") {
  const std::vector<std::vector<FeatureSpec>> specs = {
      {NormalSpec{0.0, 1.0}},
      {NormalSpec{9.0, 1.0}},
  };
  const LabeledDataset ds = render_dataset(specs, {1000, 600}, 31);
  const auto [first, second] = split_dataset(ds, 0.7, 77);

  CHECK(first.count_label(0) == 700);  // floor(0.7*1000 + 0.5)
  CHECK(first.count_label(1) == 420);
  CHECK(second.count_label(0) == 300);
  CHECK(second.count_label(1) == 180);
  CHECK(first.n_rows() + second.n_rows() == ds.n_rows());

  // order preservation: tag rows with their index and check each side keeps
  // ascending order within a label block
  LabeledDataset tagged;
  tagged.features = Matrix(10, 1);
  for (int i = 0; i < 10; ++i) tagged.features(i, 0) = i;
  tagged.labels = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  tagged.feature_names = {"f0"};
  const auto [a, b] = split_dataset(tagged, 0.6, 5);
  CHECK(a.count_label(0) == 3);
  CHECK(a.count_label(1) == 3);
  for (std::size_t i = 1; i < a.n_rows(); ++i)
    if (a.labels[i] == a.labels[i - 1]) CHECK(a.features(i, 0) > a.features(i - 1, 0));
  for (std::size_t i = 1; i < b.n_rows(); ++i)
    if (b.labels[i] == b.labels[i - 1]) CHECK(b.features(i, 0) > b.features(i - 1, 0));

  // both sides together recover the multiset of rows
  std::multiset<double> all, recovered;
  for (int i = 0; i < 10; ++i) all.insert(static_cast<double>(i));
  for (std::size_t i = 0; i < a.n_rows(); ++i) recovered.insert(a.features(i, 0));
  for (std::size_t i = 0; i < b.n_rows(); ++i) recovered.insert(b.features(i, 0));
  CHECK(recovered == all);

  // determinism and seed sensitivity
  const auto repeat = split_dataset(tagged, 0.6, 5);
  CHECK(repeat.first.features == a.features);
  bool differs = false;
  for (std::uint64_t s = 6; s < 12 && !differs; ++s)
    differs = split_dataset(tagged, 0.6, s).first.features != a.features;
  CHECK(differs);
}

TEST_CASE("split rejects degenerate inputs") {
  LabeledDataset tiny;
  tiny.features = Matrix(1, 1);
  tiny.features << 1.0;
  tiny.labels = {0};
  tiny.feature_names = {"f0"};
  CHECK_THROWS_AS(split_dataset(tiny, 0.5, 1), DataError);

  LabeledDataset ok;
  ok.features = Matrix(4, 1);
  ok.features << 1, 2, 3, 4;
  ok.labels = {0, 0, 1, 1};
  ok.feature_names = {"f0"};
  CHECK_THROWS_AS(split_dataset(ok, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(split_dataset(ok, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(split_dataset(ok, -0.1, 1), ConfigError);
}

TEST_CASE("validate rejects inconsistent datasets") {
  LabeledDataset bad;
  bad.features = Matrix(2, 1);
  bad.features << 1, 2;
  bad.labels = {0};
  bad.feature_names = {"f0"};
  CHECK_THROWS_AS(bad.validate(), DataError);

  bad.labels = {0, 3};
  CHECK_THROWS_AS(bad.validate(), DataError);

  bad.labels = {0, 1};
  bad.feature_names = {"f0", "extra"};
  CHECK_THROWS_AS(bad.validate(), DataError);

  bad.feature_names = {"f0"};
  bad.features(1, 0) = std::nan("");
  CHECK_THROWS_AS(bad.validate(), DataError);
}
