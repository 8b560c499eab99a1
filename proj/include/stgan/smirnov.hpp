#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "stgan/common.hpp"
#include "stgan/ecdf.hpp"

namespace stgan {

struct ActivationValue {
  double value;
  double deriv;
};

// Differentiable output activation mapping a standard-normal-shaped network
// output onto a target feature's empirical distribution. The map is the
// composite quantile(Phi(y)) sampled at knots over [-clip, clip] and made C1
// by a monotone cubic Hermite (Fritsch-Carlson) interpolant. Targets with at
// most `discrete_max_distinct` distinct values get extra knot pairs hugging
// each quantile jump so plateaus stay flat, plus nearest-atom snapping at
// sampling time.
class SmirnovActivation {
 public:
  static constexpr std::size_t discrete_max_distinct = 64;

  static SmirnovActivation build(const std::vector<double>& samples, std::size_t n_knots = 1024,
                                 double clip = 6.0);

  ActivationValue eval(double y) const;

  // Projects a value onto the nearest training-support atom. Only meaningful
  // for discrete targets; identity otherwise.
  double snap(double x) const;

  bool is_constant() const { return is_constant_; }
  bool is_discrete() const { return is_discrete_; }
  double clip() const { return clip_; }
  const std::vector<double>& knots_y() const { return knots_y_; }
  const std::vector<double>& knots_x() const { return knots_x_; }
  const std::vector<double>& tangents() const { return tangents_; }
  const std::vector<double>& atoms() const { return atoms_; }

  // CSV with header knot_y,knot_x,slope; one row per knot.
  std::string to_csv() const;

  // Wire format used inside generator checkpoints.
  void append_bytes(std::string& out) const;
  static SmirnovActivation from_bytes(ByteReader& in);

 private:
  std::vector<double> knots_y_;
  std::vector<double> knots_x_;
  std::vector<double> tangents_;
  std::vector<double> atoms_;
  double clip_ = 6.0;
  bool is_constant_ = false;
  bool is_discrete_ = false;
};

}  // namespace stgan
