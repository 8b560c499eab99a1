#pragma once

#include <cstddef>
#include <vector>

#include "stgan/common.hpp"

namespace stgan {

// Empirical distribution of a scalar sample. eval() is the right-continuous
// step function F(x) = (#samples <= x)/m; quantile() is the generalized
// inverse F^{-1}(p) = min{ z : F(z) >= p }, i.e. the order statistic with
// index ceil(p*m).
class EmpiricalCdf {
 public:
  static EmpiricalCdf fit(const std::vector<double>& samples);

  double eval(double x) const;
  double quantile(double p) const;

  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted_samples() const { return sorted_; }
  double min() const { return sorted_.front(); }
  double max() const { return sorted_.back(); }

  // Distinct sample values in ascending order.
  std::vector<double> distinct_values() const;

 private:
  std::vector<double> sorted_;
};

// Standard normal CDF, |error| < 1e-12 everywhere (erfc-based).
double std_normal_cdf(double x);

// Standard normal quantile (probit); rational approximation plus one Halley
// refinement, |error| < 1e-12 for p in (1e-300, 1-1e-16).
double std_normal_quantile(double p);

}  // namespace stgan
