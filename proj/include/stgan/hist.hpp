#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stgan/common.hpp"

namespace stgan {

// Uniform binning grid over a d-dimensional box. Within a dimension all bins
// share one width; membership is half-open [lo, hi) except the last bin,
// which is closed.
struct GridSpec {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<std::size_t> bins;

  std::size_t dims() const { return lo.size(); }
  bool operator==(const GridSpec& o) const = default;
};

struct HistogramGrid {
  GridSpec spec;
  std::map<std::uint64_t, std::uint64_t> counts;  // cube index -> count
  std::uint64_t out_of_range = 0;
  std::uint64_t n_rows = 0;
};

// Grid covering the union of two samples' bounding boxes, `bins_per_dim`
// bins in every dimension. The upper bound is widened by a relative 1e-9 so
// maxima land inside the last bin; a dimension whose union range is a single
// point degenerates to one bin of relative width 1e-9.
GridSpec build_grid(const Matrix& a, const Matrix& b, std::size_t bins_per_dim = 10);

HistogramGrid build_histogram(const GridSpec& spec, const Matrix& sample);

// Sum over cubes of |mass_a - mass_b| where mass = count / n_rows. Lies in
// [0, 2]; 0 for identical samples, 2 for grids whose occupied cubes are
// disjoint (with no out-of-range rows).
double l1_distance(const HistogramGrid& a, const HistogramGrid& b);

// |occupied(a) and occupied(b)| / |occupied(a) or occupied(b)|. When both
// supports are empty the value is defined as 1 and *both_empty is set.
double jaccard_index(const HistogramGrid& a, const HistogramGrid& b, bool* both_empty = nullptr);

struct SeriesRow {
  std::uint64_t rank;
  std::uint64_t real_count;
  std::uint64_t syn_count;
};

// Every cube occupied by either histogram, synthetic-only cubes first (real
// count 0), then ascending real count; ties resolved by cube index.
std::vector<SeriesRow> flatten_sorted_series(const HistogramGrid& real, const HistogramGrid& syn);

std::string series_to_csv(const std::vector<SeriesRow>& rows);

struct KdePoint {
  double x;
  double density;
};

// Gaussian kernel density over a uniform grid spanning the sample range plus
// three bandwidths on each side. bandwidth 0 selects Silverman's rule
// 1.06*sd*n^(-1/5); a zero-spread sample then raises DataError.
std::vector<KdePoint> kde_series(const std::vector<double>& sample, double bandwidth = 0.0,
                                 std::size_t grid_points = 512);

std::string kde_to_csv(const std::vector<KdePoint>& pts);

struct HistMetricPair {
  double l1;
  double jaccard;
  std::uint64_t cubes_a;
  std::uint64_t cubes_b;
};

// Convenience: grid over the union, histogram both, compute both metrics.
HistMetricPair compute_hist_metrics(const Matrix& a, const Matrix& b,
                                    std::size_t bins_per_dim = 10);

}  // namespace stgan
