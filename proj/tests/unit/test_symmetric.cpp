#include <doctest.h>

#include <cmath>
#include <random>

#include "scenery/correlations.hpp"
#include "scenery/laplace.hpp"
#include "scenery/symmetric.hpp"

using namespace scenery;

namespace {

Scenery half() { return Scenery::intervals({{0.0, pi}}); }
Scenery three_arcs() { return Scenery::intervals({{0.3, 1.5}, {2.2, 3.3}, {4.1, 5.6}}); }

double direct_pair(const Scenery& s, std::span<const int> k, int m) {
  std::vector<double> y, neg;
  for (int v : k) {
    y.push_back(v * two_pi / m);
    neg.push_back(-v * two_pi / m);
  }
  return spatial_correlation(s, pointers_1d(y)) + spatial_correlation(s, pointers_1d(neg));
}

}  // namespace

TEST_CASE("grid correlation matches the pointwise correlation") {
  std::mt19937_64 rng(6);
  for (const Scenery& s : {half(), three_arcs()})
    for (int m : {4, 7, 16}) {
      GridCorrelation g(s, m);
      std::uniform_int_distribution<int> step(-2 * m, 2 * m);
      for (int trial = 0; trial < 40; ++trial) {
        std::vector<int> k;
        std::vector<double> y;
        for (int i = 0; i < 1 + trial % 3; ++i) {
          k.push_back(step(rng));
          y.push_back(k.back() * two_pi / m);
        }
        CHECK(g.correlation(k) == doctest::Approx(spatial_correlation(s, pointers_1d(y))).epsilon(1e-12));
        CHECK(g.sigma(k) == doctest::Approx(sigma_correlation(s, y)).epsilon(1e-12));
      }
      std::vector<int> pts = {0, 1};
      std::vector<int> one = {1};
      CHECK(g.points_correlation(pts) == doctest::Approx(g.correlation(one)).epsilon(1e-14));
    }
  CHECK_THROWS(GridCorrelation(Scenery::from_intervals(2, {{{0, 1}, {0, 1}}}), 4));
}

TEST_CASE("pair sums at low order") {
  const Scenery s = three_arcs();
  const int m = 16;
  GridCorrelation g(s, m);
  SymmetricRecovery rec([&](std::span<const int> k) { return g.sigma(k); }, m);
  CHECK(rec.pair_sum({}) == doctest::Approx(2.0 * s.measure() / two_pi));
  for (int k = 1; k < m; ++k) {
    std::vector<int> kk = {k};
    CHECK(rec.pair_sum(kk) == doctest::Approx(g.sigma(kk)).epsilon(1e-14));
  }
  // zero steps repeat a point
  std::vector<int> with_zero = {3, 0, 2}, without = {3, 2};
  CHECK(rec.pair_sum(with_zero) == doctest::Approx(rec.pair_sum(without)).epsilon(1e-14));
  std::vector<int> negative = {-1};
  CHECK_THROWS(rec.pair_sum(negative));
}

TEST_CASE("pair sum of the half circle on four points") {
  const Scenery s = half();
  GridCorrelation g(s, 4);
  SymmetricRecovery rec([&](std::span<const int> k) { return g.sigma(k); }, 4);
  std::vector<int> k = {1, 1};
  CHECK(rec.pair_sum(k) == doctest::Approx(direct_pair(s, k, 4)).epsilon(1e-12));
  // {0, pi/2, pi} meets the open half circle in nothing
  CHECK(direct_pair(s, k, 4) == doctest::Approx(0.0));
}

TEST_CASE("pair sums match direct evaluation with a covering error bound") {
  for (const Scenery& s : {three_arcs(), Scenery::intervals({{0.3, 1.04}, {1.77, 3.35}, {5.24, 5.69}})}) {
    const int m = 16;
    GridCorrelation g(s, m);
    SymmetricRecovery rec([&](std::span<const int> k) { return g.sigma(k); }, m);
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> step(1, 4);
    for (int trial = 0; trial < 60; ++trial) {
      std::vector<int> k;
      for (int i = 0; i < 1 + trial % 3; ++i) k.push_back(step(rng));
      const SymmetricRecovery::Value v = rec.evaluate(k);
      const double truth = direct_pair(s, k, m);
      CHECK(std::abs(v.value - truth) <= 1e-10);
      CHECK(std::abs(v.value - truth) <= v.error + 1e-15);
    }
    CHECK(rec.oracle_calls() > 0);
    CHECK(rec.memo_size() > 0);
  }
}

TEST_CASE("symmetric_recover table") {
  const Scenery s = three_arcs();
  GridCorrelation g(s, 8);
  auto table = symmetric_recover([&](std::span<const int> k) { return g.sigma(k); }, 8, 2, 3);
  // n = 1: k in {1..3}; n = 2: k1 + k2 <= 3 with positive steps
  std::size_t n1 = 0, n2 = 0;
  for (const auto& [k, v] : table) {
    (k.size() == 1 ? n1 : n2) += 1;
    CHECK(v >= -1e-12);
  }
  CHECK(n1 >= 3);
  CHECK(n2 >= 3);
  CHECK_THROWS(symmetric_recover([&](std::span<const int> k) { return g.sigma(k); }, 8, 0, 3));
}

TEST_CASE("stehfest weights") {
  for (int n : {4, 8, 14}) {
    std::vector<double> v = stehfest_weights(n);
    REQUIRE(v.size() == static_cast<std::size_t>(n));
    double sum = 0.0, inv = 0.0, scale = 0.0;
    for (int k = 1; k <= n; ++k) {
      sum += v[static_cast<std::size_t>(k - 1)];
      inv += v[static_cast<std::size_t>(k - 1)] / k;
      scale = std::max(scale, std::abs(v[static_cast<std::size_t>(k - 1)]));
    }
    // F(s) = 1 has no inverse; F(s) = 1/s inverts to 1
    CHECK(std::abs(sum) <= 1e-12 * scale);
    CHECK(inv == doctest::Approx(1.0).epsilon(1e-8));
  }
  CHECK_THROWS(stehfest_weights(3));
}

TEST_CASE("laplace transform of sampled data") {
  std::vector<double> t, c, lin;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.1 * i);
    c.push_back(2.0);
    lin.push_back(0.1 * i);
  }
  for (double p : {0.3, 1.0, 4.0}) {
    CHECK(laplace_of_samples(t, c, p) == doctest::Approx(2.0 / p).epsilon(1e-13));
    // integral of t e^{-pt} on [0, 10] plus the tail 10 e^{-10p} / p
    CHECK(laplace_of_samples(t, lin, p) == doctest::Approx((1.0 - std::exp(-10.0 * p)) / (p * p)).epsilon(1e-12));
  }
  CHECK_THROWS(laplace_of_samples(t, c, 0.0));
}

TEST_CASE("sigma_1 from a Laplace inversion") {
  const Scenery s = half();
  const StepLaw law = StepLaw::brownian_1d(0.0, 1.0);
  std::vector<double> times, values;
  for (int i = 1; i <= 4000; ++i) {
    const double t = 0.005 * i;
    times.push_back(t);
    values.push_back(exact_temporal_fourier(law, s, {t}, 200).value);
  }
  const std::vector<double> ys = {pi / 2, 1.0, 2.0};
  std::vector<SigmaPoint> pts = laplace_invert_sigma1(law, 0.5, times, values, ys);
  REQUIRE(pts.size() == 3);
  CHECK(std::abs(pts[0].value - 0.5) <= 5e-2);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    std::vector<double> y = {ys[i]};
    CHECK(std::abs(pts[i].value - sigma_correlation(s, y)) <= 5e-2);
    CHECK(pts[i].value >= -5e-2);
  }
  CHECK_THROWS(laplace_invert_sigma1(StepLaw::brownian_1d(1.0, 1.0), 0.5, times, values, ys));
  const std::vector<double> bad = {-1.0};
  CHECK_THROWS(laplace_invert_sigma1(law, 0.5, times, values, bad));
}
