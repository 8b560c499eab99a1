#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "stgan/smirnov.hpp"
#include "support/oracles.hpp"

using namespace stgan;

namespace {

std::vector<double> normal_draws(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = rng.normal();
  return out;
}

}  // namespace

TEST_CASE("activation composes quantile with the normal cdf on continuous targets") {
  RngStream rng(31);
  std::vector<double> target(4000);
  for (auto& v : target) v = rng.normal(10.0, 2.0);
  const auto act = SmirnovActivation::build(target, 1024, 6.0);
  const auto cdf = EmpiricalCdf::fit(target);

  CHECK_FALSE(act.is_discrete());
  CHECK_FALSE(act.is_constant());
  // at any knot the interpolant is exact; between knots it stays within the
  // local quantile step (the far tails of a 4000-sample ecdf step too coarsely
  // to bound this way, so stay inside +-2.5 sigma)
  for (double y = -2.5; y <= 2.5; y += 0.0917) {
    const double want = cdf.quantile(std_normal_cdf(y));
    const double got = act.eval(y).value;
    CHECK(std::fabs(got - want) < 0.08);  // knot spacing ~0.012 keeps this tight
  }
}

TEST_CASE("activation values are monotone and match finite-difference derivatives") {
  RngStream rng(32);
  std::vector<double> target(2000);
  for (auto& v : target) v = 5.0 + 4.0 * rng.uniform01();
  const auto act = SmirnovActivation::build(target, 512, 6.0);

  double prev = act.eval(-6.5).value;
  for (double y = -6.0; y <= 6.0; y += 0.041) {
    const auto [value, deriv] = act.eval(y);
    CHECK(value >= prev - 1e-12);
    CHECK(deriv >= 0.0);
    prev = value;
  }

  const double h = 1e-6;
  for (double y = -2.5; y <= 2.5; y += 0.217) {
    const auto [value, deriv] = act.eval(y);
    const double fd = (act.eval(y + h).value - act.eval(y - h).value) / (2.0 * h);
    if (deriv > 1e-8) CHECK(std::fabs(fd - deriv) / deriv < 1e-4);
  }
}

TEST_CASE("discrete targets get flat plateaus and exact snapping") {
  // four atoms with mass 0.25 each
  std::vector<double> target;
  for (int k = 0; k < 500; ++k)
    for (double v : {1.0, 2.0, 4.0, 7.0}) target.push_back(v);
  const auto act = SmirnovActivation::build(target, 256, 6.0);

  CHECK(act.is_discrete());
  CHECK(act.atoms() == std::vector<double>{1.0, 2.0, 4.0, 7.0});

  // plateau midpoints: mass boundaries sit at Phi^{-1}(0.25/0.5/0.75)
  CHECK(act.eval(-1.5).value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(act.eval(-0.3).value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(act.eval(0.3).value == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(act.eval(1.5).value == doctest::Approx(7.0).epsilon(1e-9));

  // derivative vanishes deep inside a plateau
  CHECK(act.eval(-1.5).deriv == doctest::Approx(0.0).epsilon(1e-9));

  CHECK(act.snap(1.9) == 2.0);
  CHECK(act.snap(5.6) == 7.0);
  CHECK(act.snap(-3.0) == 1.0);
  CHECK(act.snap(4.0) == 4.0);
}

TEST_CASE("constant targets collapse to a flat activation") {
  const auto act = SmirnovActivation::build(std::vector<double>(50, 3.25), 128, 6.0);
  CHECK(act.is_constant());
  CHECK(act.eval(-4.0).value == 3.25);
  CHECK(act.eval(0.0).value == 3.25);
  CHECK(act.eval(4.0).deriv == 0.0);
  CHECK(act.snap(99.0) == 3.25);
}

TEST_CASE("pushing normal noise through the activation reproduces the target law") {
  // continuous: exponential target
  RngStream rng(33);
  std::vector<double> target(20000);
  for (auto& v : target) v = -3.0 * std::log1p(-rng.uniform01());
  const auto act = SmirnovActivation::build(target, 1024, 6.0);

  std::vector<double> transformed;
  transformed.reserve(20000);
  for (double y : normal_draws(20000, 34)) transformed.push_back(act.eval(y).value);

  std::vector<double> fresh(20000);
  RngStream rng2(35);
  for (auto& v : fresh) v = -3.0 * std::log1p(-rng2.uniform01());

  CHECK(oracles::ks_two_sample(transformed, fresh) < 0.02);
}

TEST_CASE("discrete transform with snapping emits only support values") {
  RngStream rng(36);
  std::vector<double> target(20000);
  for (auto& v : target) {
    // poisson(1) by inversion
    double u = rng.uniform01();
    double p = std::exp(-1.0), c = p;
    int k = 0;
    while (u > c && k < 50) {
      ++k;
      p *= 1.0 / k;
      c += p;
    }
    v = k;
  }
  const auto act = SmirnovActivation::build(target, 1024, 6.0);
  CHECK(act.is_discrete());

  std::vector<double> transformed;
  transformed.reserve(20000);
  std::size_t exact = 0;
  for (double y : normal_draws(20000, 37)) {
    const double snapped = act.snap(act.eval(y).value);
    transformed.push_back(snapped);
    if (snapped == std::floor(snapped) && snapped >= 0.0) ++exact;
  }
  CHECK(exact == transformed.size());
  CHECK(oracles::ks_two_sample(transformed, target) < 0.02);
}

TEST_CASE("activation tables survive the wire format bit-exactly") {
  RngStream rng(38);
  std::vector<double> target(3000);
  for (auto& v : target) v = rng.normal(0.0, 1.0) + ((rng.next_u64() & 1u) ? 4.0 : 0.0);
  const auto act = SmirnovActivation::build(target, 768, 5.5);

  std::string bytes;
  act.append_bytes(bytes);
  ByteReader reader(bytes.data(), bytes.size());
  const auto back = SmirnovActivation::from_bytes(reader);
  CHECK(reader.remaining() == 0);

  CHECK(back.clip() == act.clip());
  CHECK(back.is_discrete() == act.is_discrete());
  CHECK(back.is_constant() == act.is_constant());
  CHECK(back.knots_y() == act.knots_y());
  CHECK(back.knots_x() == act.knots_x());
  CHECK(back.tangents() == act.tangents());
  CHECK(back.atoms() == act.atoms());

  std::string again;
  back.append_bytes(again);
  CHECK(again == bytes);
}

TEST_CASE("knot table export carries one row per knot") {
  const auto act = SmirnovActivation::build({1.0, 2.0, 3.0, 4.0, 5.0}, 64, 6.0);
  const std::string csv = act.to_csv();
  CHECK(csv.rfind("knot_y,knot_x,slope\n", 0) == 0);
  const auto lines = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
  CHECK(lines == act.knots_y().size() + 1);
}

TEST_CASE("activation construction rejects degenerate configs") {
  CHECK_THROWS_AS(SmirnovActivation::build({1.0, 2.0}, 1, 6.0), ConfigError);
  CHECK_THROWS_AS(SmirnovActivation::build({}, 64, 6.0), DataError);
}
