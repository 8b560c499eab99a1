#include "stgan/hist.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stgan {

GridSpec build_grid(const Matrix& a, const Matrix& b, std::size_t bins_per_dim) {
  if (a.cols() != b.cols()) throw DataError("build_grid: dimension mismatch between samples");
  if (a.rows() == 0 || b.rows() == 0) throw DataError("build_grid: empty sample");
  if (bins_per_dim == 0) throw ConfigError("build_grid: bins_per_dim must be positive");
  const auto d = static_cast<std::size_t>(a.cols());
  GridSpec spec;
  spec.lo.resize(d);
  spec.hi.resize(d);
  spec.bins.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double lo = std::min(a.col(j).minCoeff(), b.col(j).minCoeff());
    const double hi = std::max(a.col(j).maxCoeff(), b.col(j).maxCoeff());
    if (!std::isfinite(lo) || !std::isfinite(hi))
      throw DataError("build_grid: non-finite value in sample");
    const double pad = std::max(std::abs(hi), 1.0) * 1e-9;
    spec.lo[j] = lo;
    if (hi == lo) {
      spec.hi[j] = lo + std::max(std::abs(lo), 1.0) * 1e-9;
      spec.bins[j] = 1;
    } else {
      spec.hi[j] = hi + pad;
      spec.bins[j] = bins_per_dim;
    }
  }
  return spec;
}

HistogramGrid build_histogram(const GridSpec& spec, const Matrix& sample) {
  if (static_cast<std::size_t>(sample.cols()) != spec.dims())
    throw DataError("build_histogram: sample dimension does not match grid");
  HistogramGrid hist;
  hist.spec = spec;
  hist.n_rows = static_cast<std::uint64_t>(sample.rows());
  const auto d = spec.dims();
  std::vector<double> width(d);
  for (std::size_t j = 0; j < d; ++j)
    width[j] = (spec.hi[j] - spec.lo[j]) / static_cast<double>(spec.bins[j]);
  for (Eigen::Index r = 0; r < sample.rows(); ++r) {
    std::uint64_t idx = 0;
    bool in_range = true;
    for (std::size_t j = 0; j < d; ++j) {
      const double x = sample(r, static_cast<Eigen::Index>(j));
      if (x < spec.lo[j] || x > spec.hi[j]) {
        in_range = false;
        break;
      }
      auto bin = static_cast<std::uint64_t>((x - spec.lo[j]) / width[j]);
      if (bin >= spec.bins[j]) bin = spec.bins[j] - 1;  // hi itself: last bin is closed
      idx = idx * spec.bins[j] + bin;
    }
    if (in_range)
      ++hist.counts[idx];
    else
      ++hist.out_of_range;
  }
  return hist;
}

namespace {

void require_same_grid(const HistogramGrid& a, const HistogramGrid& b, const char* op) {
  if (!(a.spec == b.spec))
    throw ContractError(std::string(op) + ": histograms use different grids");
}

}  // namespace

double l1_distance(const HistogramGrid& a, const HistogramGrid& b) {
  require_same_grid(a, b, "l1_distance");
  if (a.n_rows == 0 || b.n_rows == 0) throw DataError("l1_distance: empty histogram");
  const double na = static_cast<double>(a.n_rows);
  const double nb = static_cast<double>(b.n_rows);
  double total = 0.0;
  auto ia = a.counts.begin();
  auto ib = b.counts.begin();
  while (ia != a.counts.end() || ib != b.counts.end()) {
    if (ib == b.counts.end() || (ia != a.counts.end() && ia->first < ib->first)) {
      total += static_cast<double>(ia->second) / na;
      ++ia;
    } else if (ia == a.counts.end() || ib->first < ia->first) {
      total += static_cast<double>(ib->second) / nb;
      ++ib;
    } else {
      total += std::abs(static_cast<double>(ia->second) / na -
                        static_cast<double>(ib->second) / nb);
      ++ia;
      ++ib;
    }
  }
  return total;
}

double jaccard_index(const HistogramGrid& a, const HistogramGrid& b, bool* both_empty) {
  require_same_grid(a, b, "jaccard_index");
  if (both_empty) *both_empty = false;
  std::size_t inter = 0;
  std::size_t uni = 0;
  auto ia = a.counts.begin();
  auto ib = b.counts.begin();
  while (ia != a.counts.end() || ib != b.counts.end()) {
    if (ib == b.counts.end() || (ia != a.counts.end() && ia->first < ib->first)) {
      ++uni;
      ++ia;
    } else if (ia == a.counts.end() || ib->first < ia->first) {
      ++uni;
      ++ib;
    } else {
      ++uni;
      ++inter;
      ++ia;
      ++ib;
    }
  }
  if (uni == 0) {
    if (both_empty) *both_empty = true;
    return 1.0;
  }
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<SeriesRow> flatten_sorted_series(const HistogramGrid& real,
                                             const HistogramGrid& syn) {
  require_same_grid(real, syn, "flatten_sorted_series");
  struct Cube {
    std::uint64_t idx;
    std::uint64_t real_count;
    std::uint64_t syn_count;
  };
  std::vector<Cube> cubes;
  auto ir = real.counts.begin();
  auto is = syn.counts.begin();
  while (ir != real.counts.end() || is != syn.counts.end()) {
    if (is == syn.counts.end() || (ir != real.counts.end() && ir->first < is->first)) {
      cubes.push_back({ir->first, ir->second, 0});
      ++ir;
    } else if (ir == real.counts.end() || is->first < ir->first) {
      cubes.push_back({is->first, 0, is->second});
      ++is;
    } else {
      cubes.push_back({ir->first, ir->second, is->second});
      ++ir;
      ++is;
    }
  }
  std::stable_sort(cubes.begin(), cubes.end(), [](const Cube& x, const Cube& y) {
    if (x.real_count != y.real_count) return x.real_count < y.real_count;
    return x.idx < y.idx;
  });
  std::vector<SeriesRow> rows;
  rows.reserve(cubes.size());
  for (std::size_t i = 0; i < cubes.size(); ++i)
    rows.push_back({static_cast<std::uint64_t>(i), cubes[i].real_count, cubes[i].syn_count});
  return rows;
}

std::string series_to_csv(const std::vector<SeriesRow>& rows) {
  std::ostringstream out;
  out << "rank,real_count,syn_count\n";
  for (const auto& r : rows)
    out << r.rank << ',' << r.real_count << ',' << r.syn_count << '\n';
  return out.str();
}

std::vector<KdePoint> kde_series(const std::vector<double>& sample, double bandwidth,
                                 std::size_t grid_points) {
  if (sample.empty()) throw DataError("kde_series: empty sample");
  if (grid_points < 2) throw ConfigError("kde_series: grid_points must be at least 2");
  const auto n = static_cast<double>(sample.size());
  double bw = bandwidth;
  if (bw <= 0.0) {
    if (sample.size() < 2)
      throw DataError("kde_series: automatic bandwidth needs at least 2 samples");
    double mean = 0.0;
    for (double x : sample) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : sample) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (sd == 0.0)
      throw DataError("kde_series: zero-spread sample needs an explicit bandwidth");
    bw = 1.06 * sd * std::pow(n, -0.2);
  }
  const auto [mn_it, mx_it] = std::minmax_element(sample.begin(), sample.end());
  const double lo = *mn_it - 3.0 * bw;
  const double hi = *mx_it + 3.0 * bw;
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  const double norm = 1.0 / (n * bw * 2.5066282746310005024157652848110);
  std::vector<KdePoint> pts(grid_points);
  for (std::size_t g = 0; g < grid_points; ++g) {
    const double x = lo + step * static_cast<double>(g);
    double acc = 0.0;
    for (double s : sample) {
      const double u = (x - s) / bw;
      acc += std::exp(-0.5 * u * u);
    }
    pts[g] = {x, acc * norm};
  }
  return pts;
}

std::string kde_to_csv(const std::vector<KdePoint>& pts) {
  std::ostringstream out;
  out << "x,density\n";
  for (const auto& p : pts)
    out << format_double(p.x) << ',' << format_double(p.density) << '\n';
  return out.str();
}

HistMetricPair compute_hist_metrics(const Matrix& a, const Matrix& b,
                                    std::size_t bins_per_dim) {
  const GridSpec spec = build_grid(a, b, bins_per_dim);
  const HistogramGrid ha = build_histogram(spec, a);
  const HistogramGrid hb = build_histogram(spec, b);
  HistMetricPair out;
  out.l1 = l1_distance(ha, hb);
  out.jaccard = jaccard_index(ha, hb);
  out.cubes_a = ha.counts.size();
  out.cubes_b = hb.counts.size();
  return out;
}

}  // namespace stgan
