#include <cmath>
#include <vector>

#include "doctest.h"
#include "stgan/hist.hpp"

using namespace stgan;

namespace {

Matrix column(const std::vector<double>& xs) {
  Matrix m(static_cast<Eigen::Index>(xs.size()), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = xs[i];
  return m;
}

Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed, double spread) {
  RngStream rng(seed);
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal(0.0, spread);
  return m;
}

}  // namespace

TEST_CASE("identical samples give l1 zero and jaccard one") {
  const Matrix a = random_matrix(500, 3, 1, 1.0);
  const auto m = compute_hist_metrics(a, a, 10);
  CHECK(m.l1 == 0.0);
  CHECK(m.jaccard == 1.0);
  CHECK(m.cubes_a == m.cubes_b);
}

TEST_CASE("disjoint supports give l1 two and jaccard zero") {
  const Matrix a = column({0.0, 0.1, 0.2, 0.3});
  const Matrix b = column({100.0, 100.1, 100.2});
  const auto m = compute_hist_metrics(a, b, 10);
  CHECK(m.l1 == 2.0);
  CHECK(m.jaccard == 0.0);
}

TEST_CASE("l1 is symmetric and satisfies the triangle inequality") {
  for (std::uint64_t trial = 0; trial < 60; ++trial) {
    const Matrix a = random_matrix(80, 2, 100 + trial, 1.0 + (trial % 3));
    const Matrix b = random_matrix(90, 2, 200 + trial, 1.0 + (trial % 5));
    const Matrix c = random_matrix(70, 2, 300 + trial, 2.0);

    // all three histograms must share one grid for the triangle inequality
    Matrix ab(a.rows() + b.rows(), 2), abc(a.rows() + b.rows() + c.rows(), 2);
    ab << a, b;
    abc << ab, c;
    const GridSpec grid = build_grid(abc, abc, 8);
    const auto ha = build_histogram(grid, a);
    const auto hb = build_histogram(grid, b);
    const auto hc = build_histogram(grid, c);

    const double dab = l1_distance(ha, hb);
    const double dba = l1_distance(hb, ha);
    const double dac = l1_distance(ha, hc);
    const double dcb = l1_distance(hc, hb);
    CHECK(dab == dba);
    CHECK(dab <= dac + dcb + 1e-12);
    CHECK(dab >= 0.0);
    CHECK(dab <= 2.0);

    const double jab = jaccard_index(ha, hb);
    CHECK(jab == jaccard_index(hb, ha));
    CHECK(jab >= 0.0);
    CHECK(jab <= 1.0);
  }
}

TEST_CASE("same-distribution samples converge under both metrics") {
  const Matrix a = random_matrix(20000, 1, 7, 1.0);
  const Matrix b = random_matrix(20000, 1, 8, 1.0);
  const auto m = compute_hist_metrics(a, b, 10);
  CHECK(m.l1 < 0.1);
  CHECK(m.jaccard > 0.7);
}

TEST_CASE("degenerate dimensions collapse to a single bin") {
  Matrix a(3, 2), b(2, 2);
  a << 1.0, 5.0, 2.0, 5.0, 3.0, 5.0;
  b << 1.5, 5.0, 2.5, 5.0;
  const GridSpec grid = build_grid(a, b, 10);
  CHECK(grid.bins[0] == 10);
  CHECK(grid.bins[1] == 1);
  const auto ha = build_histogram(grid, a);
  CHECK(ha.out_of_range == 0);
  CHECK(ha.n_rows == 3);
}

TEST_CASE("rows outside the grid are counted, not binned") {
  const Matrix a = column({0.0, 1.0});
  const GridSpec grid = build_grid(a, a, 4);
  const auto h = build_histogram(grid, column({0.5, 50.0, -3.0}));
  CHECK(h.out_of_range == 2);
  CHECK(h.n_rows == 3);
  std::uint64_t binned = 0;
  for (const auto& [idx, count] : h.counts) binned += count;
  CHECK(binned == 1);
}

TEST_CASE("grid extremes land inside the histogram") {
  const Matrix a = column({-2.0, 0.0, 3.0});
  const GridSpec grid = build_grid(a, a, 5);
  const auto h = build_histogram(grid, a);
  CHECK(h.out_of_range == 0);
}

TEST_CASE("flattened series puts synthetic-only cubes first, then ascending real mass") {
  const Matrix real = column({0.05, 0.05, 0.15, 0.15, 0.15, 0.25});
  const Matrix syn = column({0.35, 0.15, 0.15});
  // grid over [0, ~0.35] with 4 bins puts each cluster in its own cube
  const GridSpec grid = build_grid(real, syn, 4);
  const auto hr = build_histogram(grid, real);
  const auto hs = build_histogram(grid, syn);
  const auto series = flatten_sorted_series(hr, hs);

  REQUIRE(series.size() == 4);
  CHECK(series[0].real_count == 0);  // the synthetic-only cube leads
  CHECK(series[0].syn_count == 1);
  CHECK(series[1].real_count == 1);
  CHECK(series[2].real_count == 2);
  CHECK(series[3].real_count == 3);
  CHECK(series[3].syn_count == 2);
  for (std::size_t i = 0; i < series.size(); ++i) CHECK(series[i].rank == i);

  const std::string csv = series_to_csv(series);
  CHECK(csv == "rank,real_count,syn_count\n0,0,1\n1,1,0\n2,2,0\n3,3,2\n");
}

TEST_CASE("kernel density is symmetric and integrates to one") {
  std::vector<double> sample = {-2.0, -1.0, 0.0, 1.0, 2.0, -1.5, 1.5, -0.5, 0.5};
  const auto pts = kde_series(sample, 0.6, 512);
  REQUIRE(pts.size() == 512);

  // the sample is symmetric about 0, so the density must be too
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& mirror = pts[pts.size() - 1 - i];
    CHECK(pts[i].x == doctest::Approx(-mirror.x).epsilon(1e-9));
    CHECK(pts[i].density == doctest::Approx(mirror.density).epsilon(1e-9));
  }

  double integral = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    integral += 0.5 * (pts[i].density + pts[i - 1].density) * (pts[i].x - pts[i - 1].x);
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("kde bandwidth defaults to Silverman's rule") {
  RngStream rng(91);
  std::vector<double> sample(400);
  double sum = 0.0, sq = 0.0;
  for (auto& v : sample) {
    v = rng.normal(2.0, 3.0);
    sum += v;
  }
  const double mean = sum / static_cast<double>(sample.size());
  for (double v : sample) sq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sq / static_cast<double>(sample.size() - 1));
  const double silverman = 1.06 * sd * std::pow(static_cast<double>(sample.size()), -0.2);

  const auto auto_pts = kde_series(sample, 0.0, 128);
  const auto manual_pts = kde_series(sample, silverman, 128);
  for (std::size_t i = 0; i < auto_pts.size(); ++i) {
    CHECK(auto_pts[i].x == manual_pts[i].x);
    CHECK(auto_pts[i].density == manual_pts[i].density);
  }

  CHECK_THROWS_AS(kde_series(std::vector<double>(10, 4.0), 0.0, 64), DataError);
}

TEST_CASE("histogram construction validates its inputs") {
  const Matrix a = column({1.0});
  Matrix b(1, 2);
  b << 1.0, 2.0;
  CHECK_THROWS_AS(build_grid(a, b, 10), DataError);
  CHECK_THROWS_AS(build_grid(a, a, 0), ConfigError);
  CHECK_THROWS_AS(build_grid(Matrix(0, 1), a, 10), DataError);
}
