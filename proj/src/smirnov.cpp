#include "stgan/smirnov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stgan {

namespace {

// Fritsch-Carlson tangent limiting: monotone C1 interpolant through
// non-decreasing knot values.
std::vector<double> monotone_tangents(const std::vector<double>& y, const std::vector<double>& x) {
  const std::size_t n = y.size();
  std::vector<double> secant(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = y[i + 1] - y[i];
    secant[i] = (x[i + 1] - x[i]) / h;
  }
  std::vector<double> m(n);
  m[0] = secant[0];
  m[n - 1] = secant[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (secant[i - 1] * secant[i] <= 0.0)
      m[i] = 0.0;
    else
      m[i] = 0.5 * (secant[i - 1] + secant[i]);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (secant[i] == 0.0) {
      m[i] = 0.0;
      m[i + 1] = 0.0;
      continue;
    }
    const double a = m[i] / secant[i];
    const double b = m[i + 1] / secant[i];
    const double s = a * a + b * b;
    if (s > 9.0) {
      const double tau = 3.0 / std::sqrt(s);
      m[i] = tau * a * secant[i];
      m[i + 1] = tau * b * secant[i];
    }
  }
  return m;
}

}  // namespace

SmirnovActivation SmirnovActivation::build(const std::vector<double>& samples,
                                           std::size_t n_knots, double clip) {
  if (n_knots < 2) throw ConfigError("SmirnovActivation: n_knots must be at least 2");
  if (!(clip > 0.0)) throw ConfigError("SmirnovActivation: clip must be positive");
  const EmpiricalCdf cdf = EmpiricalCdf::fit(samples);

  SmirnovActivation act;
  act.clip_ = clip;

  const std::vector<double> distinct = cdf.distinct_values();
  if (distinct.size() == 1) {
    act.is_constant_ = true;
    act.is_discrete_ = true;
    act.atoms_ = distinct;
    act.knots_y_ = {-clip, clip};
    act.knots_x_ = {distinct[0], distinct[0]};
    act.tangents_ = {0.0, 0.0};
    return act;
  }
  act.is_discrete_ = distinct.size() <= discrete_max_distinct;
  if (act.is_discrete_) act.atoms_ = distinct;

  const double h = 2.0 * clip / static_cast<double>(n_knots - 1);
  std::vector<double> ys;
  ys.reserve(n_knots + (act.is_discrete_ ? 2 * distinct.size() : 0));
  for (std::size_t i = 0; i < n_knots; ++i)
    ys.push_back(-clip + h * static_cast<double>(i));
  ys.back() = clip;

  if (act.is_discrete_) {
    // a quantile jump sits where Phi crosses the cumulative mass of each atom;
    // pin a knot on either side so the plateau stays flat through the spline
    const double delta = h / 4.0;
    std::vector<double> jump_ys;
    for (std::size_t j = 0; j + 1 < distinct.size(); ++j) {
      const double level = cdf.eval(distinct[j]);
      if (level <= 0.0 || level >= 1.0) continue;
      const double y_star = std_normal_quantile(level);
      if (y_star <= -clip + delta || y_star >= clip - delta) continue;
      jump_ys.push_back(y_star);
    }
    // drop base knots falling inside a transition band, then add the pairs
    std::vector<double> filtered;
    filtered.reserve(ys.size());
    for (double y : ys) {
      bool in_band = false;
      for (double j : jump_ys)
        if (std::abs(y - j) < delta) {
          in_band = true;
          break;
        }
      if (!in_band) filtered.push_back(y);
    }
    for (double j : jump_ys) {
      filtered.push_back(j - delta);
      filtered.push_back(j + delta);
    }
    std::sort(filtered.begin(), filtered.end());
    ys = std::move(filtered);
  }

  // enforce strictly increasing knots
  std::vector<double> knots_y;
  knots_y.reserve(ys.size());
  for (double y : ys)
    if (knots_y.empty() || y > knots_y.back() + 1e-12) knots_y.push_back(y);

  std::vector<double> knots_x(knots_y.size());
  for (std::size_t i = 0; i < knots_y.size(); ++i)
    knots_x[i] = cdf.quantile(std_normal_cdf(knots_y[i]));

  act.knots_y_ = std::move(knots_y);
  act.knots_x_ = std::move(knots_x);
  act.tangents_ = monotone_tangents(act.knots_y_, act.knots_x_);
  return act;
}

ActivationValue SmirnovActivation::eval(double y) const {
  if (is_constant_) return {knots_x_.front(), 0.0};
  if (y <= knots_y_.front()) return {knots_x_.front(), 0.0};
  if (y >= knots_y_.back()) return {knots_x_.back(), 0.0};
  const auto it = std::upper_bound(knots_y_.begin(), knots_y_.end(), y);
  const std::size_t i = static_cast<std::size_t>(it - knots_y_.begin()) - 1;
  const double h = knots_y_[i + 1] - knots_y_[i];
  const double t = (y - knots_y_[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  const double value = h00 * knots_x_[i] + h10 * h * tangents_[i] + h01 * knots_x_[i + 1] +
                       h11 * h * tangents_[i + 1];
  const double d00 = 6.0 * t2 - 6.0 * t;
  const double d10 = 3.0 * t2 - 4.0 * t + 1.0;
  const double d01 = -6.0 * t2 + 6.0 * t;
  const double d11 = 3.0 * t2 - 2.0 * t;
  const double deriv = (d00 * knots_x_[i] + d01 * knots_x_[i + 1]) / h + d10 * tangents_[i] +
                       d11 * tangents_[i + 1];
  return {value, deriv};
}

double SmirnovActivation::snap(double x) const {
  if (!is_discrete_ || atoms_.empty()) return x;
  const auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x);
  if (it == atoms_.begin()) return atoms_.front();
  if (it == atoms_.end()) return atoms_.back();
  const double hi = *it;
  const double lo = *(it - 1);
  return (x - lo <= hi - x) ? lo : hi;
}

std::string SmirnovActivation::to_csv() const {
  std::ostringstream out;
  out << "knot_y,knot_x,slope\n";
  for (std::size_t i = 0; i < knots_y_.size(); ++i)
    out << format_double(knots_y_[i]) << ',' << format_double(knots_x_[i]) << ','
        << format_double(tangents_[i]) << '\n';
  return out.str();
}

void SmirnovActivation::append_bytes(std::string& out) const {
  put_f64_le(out, clip_);
  out.push_back(is_constant_ ? 1 : 0);
  out.push_back(is_discrete_ ? 1 : 0);
  put_u32_le(out, static_cast<std::uint32_t>(knots_y_.size()));
  for (double v : knots_y_) put_f64_le(out, v);
  for (double v : knots_x_) put_f64_le(out, v);
  for (double v : tangents_) put_f64_le(out, v);
  put_u32_le(out, static_cast<std::uint32_t>(atoms_.size()));
  for (double v : atoms_) put_f64_le(out, v);
}

SmirnovActivation SmirnovActivation::from_bytes(ByteReader& in) {
  SmirnovActivation act;
  act.clip_ = in.f64();
  act.is_constant_ = in.bytes(1)[0] != 0;
  act.is_discrete_ = in.bytes(1)[0] != 0;
  const std::uint32_t n = in.u32();
  act.knots_y_.resize(n);
  act.knots_x_.resize(n);
  act.tangents_.resize(n);
  for (auto& v : act.knots_y_) v = in.f64();
  for (auto& v : act.knots_x_) v = in.f64();
  for (auto& v : act.tangents_) v = in.f64();
  const std::uint32_t na = in.u32();
  act.atoms_.resize(na);
  for (auto& v : act.atoms_) v = in.f64();
  return act;
}

}  // namespace stgan
