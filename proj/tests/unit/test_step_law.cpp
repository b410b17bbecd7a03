#include <doctest.h>

#include <cmath>
#include <random>

#include "scenery/step_law.hpp"

using namespace scenery;

namespace {

using C = std::complex<double>;

StepLaw atom_law() {
  return StepLaw::compound_poisson(1, 1.0, {{0.6, {0.4}, {0.09}}, {0.4, {-1.0}, {0.25}}});
}

StepLaw mixed_law() {
  return StepLaw(1, Brownian{{0.7}, {0.3}}, JumpPart{2.0, {{1.0, {0.5}, {0.2}}}});
}

C at(const StepLaw& law, double t, int k, bool gamma) {
  std::vector<int> kk = {k};
  return gamma ? law.gamma_hat(t, kk) : law.d_hat(t, kk);
}

}  // namespace

TEST_CASE("beta") {
  const StepLaw jump = atom_law();
  CHECK(jump.beta(2.0) == doctest::Approx(std::exp(-2.0)));
  CHECK(jump.beta(1.0) * jump.beta(1.0) == doctest::Approx(jump.beta(2.0)).epsilon(1e-15));
  CHECK(StepLaw::brownian_1d(1.0, 1.0).beta(3.0) == 0.0);
  CHECK(mixed_law().beta(0.1) == 0.0);
  CHECK_THROWS_AS(jump.beta(0.0), std::invalid_argument);
  CHECK_THROWS_AS(jump.beta(-1.0), std::invalid_argument);
}

TEST_CASE("d_hat") {
  for (const StepLaw& law : {atom_law(), mixed_law(), StepLaw::brownian_1d(1.0, 2.0)})
    CHECK(std::abs(at(law, 0.7, 0, false) - 1.0) < 1e-15);

  const StepLaw b = StepLaw::brownian_1d(0.0, 1.0);
  double prev = 1.0;
  for (int k = 0; k <= 5; ++k) {
    C v = at(b, 0.8, k, false);
    CHECK(v.imag() == 0.0);
    CHECK(v.real() > 0.0);
    CHECK(v.real() <= prev);
    prev = v.real();
    CHECK(std::abs(v - at(b, 0.8, -k, false)) == 0.0);
  }
  CHECK_THROWS_AS(at(b, 0.0, 1, false), std::invalid_argument);
}

TEST_CASE("semigroup") {
  for (const StepLaw& law : {atom_law(), mixed_law(), StepLaw::brownian_1d(1.0, 2.0)})
    for (double t : {0.1, 0.5, 2.0})
      for (double s : {0.3, 1.0})
        for (int k = -4; k <= 4; ++k) {
          CHECK(std::abs(at(law, t + s, k, false) - at(law, t, k, false) * at(law, s, k, false)) <= 1e-12);
          CHECK(std::abs(at(law, t, k, false) - std::pow(at(law, t / 2, k, false), 2)) <= 1e-15);
        }
}

TEST_CASE("gamma_hat") {
  for (const StepLaw& law : {atom_law(), mixed_law()}) CHECK(std::abs(at(law, 0.4, 0, true) - 1.0) < 1e-14);
  const StepLaw drift = StepLaw::brownian_1d(2.0, 1.0), still = StepLaw::brownian_1d(0.0, 1.0);
  for (double t : {0.2, 1.3})
    for (int k = -3; k <= 3; ++k) CHECK(std::abs(at(drift, t, k, true)) == doctest::Approx(std::abs(at(still, t, k, true))));

  // real-valued and equal to the quadrature of the wrapped density
  std::vector<int> one = {1};
  const C closed = still.gamma_hat(1.0, one);
  CHECK(closed.imag() == 0.0);
  CHECK(std::abs(closed - quadrature_gamma_hat(still, 1.0, one)) <= 1e-10);

  // a jump law needs a positive rate
  CHECK_THROWS(StepLaw::compound_poisson(1, 0.0, {{1.0, {0.0}, {1.0}}}));
}

TEST_CASE("closed form agrees with the quadrature oracle") {
  const StepLaw d2(2, Brownian{{0.5, -1.0}, {0.8, 0.3}}, JumpPart{0.7, {{1.0, {0.2, 0.1}, {0.3, 0.5}}}});
  for (const StepLaw& law : {atom_law(), mixed_law(), StepLaw::brownian_1d(1.0, 1.0), StepLaw::brownian_1d(-0.4, 3.0)})
    for (double t : {0.25, 1.0, 2.5})
      for (int k = -4; k <= 4; ++k) {
        std::vector<int> kk = {k};
        CHECK(std::abs(law.gamma_hat(t, kk) - quadrature_gamma_hat(law, t, kk)) <= 1e-9);
      }
  for (double t : {0.5, 1.5})
    for (int a = -2; a <= 2; ++a)
      for (int b = -2; b <= 2; ++b) {
        std::vector<int> kk = {a, b};
        CHECK(std::abs(d2.gamma_hat(t, kk) - quadrature_gamma_hat(d2, t, kk, 1e-11)) <= 1e-9);
      }
}

TEST_CASE("quadrature oracle limits") {
  std::vector<int> zero = {0}, one = {1};
  const StepLaw b = StepLaw::brownian_1d(0.3, 1.0);
  CHECK(std::abs(quadrature_gamma_hat(b, 0.5, zero) - 1.0) <= 1e-12);
  CHECK(std::abs(quadrature_gamma_hat(StepLaw::brownian_1d(0.0, 100.0), 1.0, one)) < 1e-8);

  // small t: conditioned on at least one jump, one jump dominates
  const StepLaw j = StepLaw::compound_poisson(1, 1.0, {{1.0, {0.4}, {0.09}}});
  const double t = 1e-4;
  const C h = std::exp(C(0, -0.4)) * std::exp(-0.5 * 0.09);
  CHECK(std::abs(quadrature_gamma_hat(j, t, one) - h) < 1e-3);
  CHECK_THROWS(quadrature_gamma_hat(StepLaw::brownian({0, 0, 0, 0}, {1, 1, 1, 1}), 1.0, std::vector<int>{1, 0, 0, 0}));
}

TEST_CASE("gamma_hat_scaled") {
  std::vector<int> k2 = {2}, k1 = {1};
  const StepLaw j = atom_law();
  for (int k = -3; k <= 3; ++k) {
    std::vector<int> kk = {k};
    CHECK(std::abs(gamma_hat_scaled(j, 0.6, 1.0, kk).value - j.gamma_hat(0.6, kk)) <= 1e-14);
  }
  const StepLaw b = StepLaw::brownian_1d(1.0, 1.0);
  CHECK(std::abs(gamma_hat_scaled(b, 0.5, 2.0, k1).value - std::pow(b.gamma_hat(0.5, k1), 2)) <= 1e-15);

  const StepLaw unit = StepLaw::compound_poisson(1, 1.0, {{1.0, {0.4}, {0.09}}});
  CHECK(std::abs(gamma_hat_scaled(unit, 1.0, 1.7, k2).value - unit.gamma_hat(1.7, k2)) <= 1e-12);

  for (const StepLaw& law : {atom_law(), mixed_law()})
    for (double alpha : {0.5, 0.9, 1.3, 2.0})
      for (int k = -3; k <= 3; ++k) {
        std::vector<int> kk = {k};
        ScaledCoefficient s = gamma_hat_scaled(law, 0.4, alpha, kk);
        if (!s.branch_ambiguous) CHECK(std::abs(s.value - law.gamma_hat(0.4 * alpha, kk)) <= 1e-10);
      }

  // a fast drift winds the phase past pi and is flagged
  CHECK(gamma_hat_scaled(StepLaw::brownian_1d(10.0, 0.1), 1.0, 1.5, k1).branch_ambiguous);
}

TEST_CASE("sampled increments match the characteristic function") {
  const StepLaw law = mixed_law();
  const double t = 0.6;
  std::mt19937_64 rng(11);
  const int draws = 1000000;
  std::vector<C> sum(4, 0.0);
  IncrementSampler sampler(law, t);
  for (int i = 0; i < draws; ++i) {
    double x = 0.0;
    sampler.add_to(std::span<double>(&x, 1), rng);
    for (int k = 0; k <= 3; ++k) {
      C e = std::exp(C(0, -k * x));
      sum[static_cast<std::size_t>(k)] += e;
    }
  }
  for (int k = 0; k <= 3; ++k) {
    C mean = sum[static_cast<std::size_t>(k)] / static_cast<double>(draws);
    // each part of e^{-ikX} has variance at most 1/2
    const double se = std::sqrt(0.5 / draws);
    C target = at(law, t, k, false);
    CHECK(std::abs(mean.real() - target.real()) <= 4 * se);
    CHECK(std::abs(mean.imag() - target.imag()) <= 4 * se);
  }
}

TEST_CASE("sample_increment limits") {
  std::mt19937_64 rng(5);
  const StepLaw b = StepLaw::brownian_1d(0.0, 1.0);
  int near = 0;
  for (int i = 0; i < 10000; ++i) {
    TorusPoint p = sample_increment(b, 1e-8, rng);
    if (p[0] < 1e-3 || p[0] > two_pi - 1e-3) ++near;
  }
  CHECK(near > 9900);

  const StepLaw j = StepLaw::compound_poisson(1, 0.01, {{1.0, {0.5}, {0.1}}});
  int zeros = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i)
    if (sample_increment(j, 1.0, rng)[0] == 0.0) ++zeros;
  const double p = std::exp(-0.01);
  CHECK(std::abs(zeros / static_cast<double>(n) - p) <= 4 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("distinctness") {
  const StepLaw still = StepLaw::brownian_1d(0.0, 1.0);
  CHECK_FALSE(distinctness_report(still, 1.0, 3, 1e-9).passed);
  CHECK(distinctness_report(still, 1.0, 3, 1e-9, IndexCone::nonnegative).passed);
  CHECK(still.is_symmetric());

  DistinctnessReport r = distinctness_report(StepLaw::brownian_1d(1.0, 1.0), 1.0, 3, 1e-9);
  CHECK(r.passed);
  CHECK(r.count == 7);
  CHECK(r.min_pairwise_distance > 0.0);

  // equal drifts and rates make k = (1, 0) and (0, 1) collide
  r = distinctness_report(StepLaw::brownian({1.0, 1.0}, {1.0, 1.0}), 0.5, 1, 1e-9);
  CHECK_FALSE(r.passed);
  CHECK(r.min_pairwise_distance < 1e-15);
}

TEST_CASE("index box order") {
  std::vector<IndexTuple> box = index_box(2, 1);
  REQUIRE(box.size() == 9);
  CHECK(box.front() == IndexTuple{-1, -1});
  CHECK(box[1] == IndexTuple{-1, 0});
  CHECK(box.back() == IndexTuple{1, 1});
  CHECK(index_box(1, 3, IndexCone::nonnegative).size() == 4);
}

TEST_CASE("decay rate") {
  CHECK(StepLaw::brownian_1d(2.0, 0.5).slowest_decay_rate() == doctest::Approx(0.25));
  const StepLaw j = StepLaw::compound_poisson(1, 1.0, {{1.0, {0.4}, {0.09}}});
  CHECK(j.slowest_decay_rate() == doctest::Approx(1.0 - std::cos(0.4) * std::exp(-0.045)));
}
