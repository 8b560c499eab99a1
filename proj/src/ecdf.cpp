#include "stgan/ecdf.hpp"

#include <algorithm>
#include <cmath>

namespace stgan {

EmpiricalCdf EmpiricalCdf::fit(const std::vector<double>& samples) {
  if (samples.empty()) throw DataError("EmpiricalCdf: sample is empty");
  for (double s : samples)
    if (!std::isfinite(s)) throw DataError("EmpiricalCdf: sample contains a non-finite value");
  EmpiricalCdf cdf;
  cdf.sorted_ = samples;
  std::sort(cdf.sorted_.begin(), cdf.sorted_.end());
  return cdf;
}

double EmpiricalCdf::eval(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double EmpiricalCdf::quantile(double p) const {
  if (!(p > 0.0) || !(p <= 1.0))
    throw DataError("EmpiricalCdf::quantile: p must lie in (0, 1]");
  const auto m = static_cast<double>(sorted_.size());
  // smallest k with k/m >= p is k = ceil(p*m); the epsilon guards against
  // p*m landing one ulp above an exact integer
  auto k = static_cast<std::size_t>(std::ceil(p * m - 1e-9));
  if (k < 1) k = 1;
  if (k > sorted_.size()) k = sorted_.size();
  return sorted_[k - 1];
}

std::vector<double> EmpiricalCdf::distinct_values() const {
  std::vector<double> vals = sorted_;
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  return vals;
}

double std_normal_cdf(double x) {
  // 0.5*erfc(-x/sqrt(2)); libm's erfc is a rational approximation with
  // relative error well below 1e-14
  return 0.5 * std::erfc(-x * 0.7071067811865475244008443621048490);
}

namespace {

// Acklam's rational approximation to the probit function.
double probit_estimate(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double std_normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw NumericError("std_normal_quantile: p must lie strictly in (0, 1)");
  double x = probit_estimate(p);
  // one Halley step against the high-precision CDF
  const double e = std_normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

}  // namespace stgan
