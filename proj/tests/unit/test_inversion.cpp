#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "scenery/inversion.hpp"

using namespace scenery;

namespace {

Scenery half() { return Scenery::intervals({{0.0, pi}}); }
Scenery three_arcs() { return Scenery::intervals({{0.3, 1.5}, {2.2, 3.3}, {4.1, 5.6}}); }

MultiplierSet ones(int n, double t0, int K) {
  MultiplierSet m;
  m.t0 = t0;
  m.alpha.assign(static_cast<std::size_t>(n), 1.0);
  m.cutoff = K;
  return m;
}

}  // namespace

TEST_CASE("power reduction") {
  std::vector<double> c = power_reduction(0.0, 3);
  CHECK(c == std::vector<double>{0.0, 0.0, 1.0});
  c = power_reduction(0.5, 1);
  CHECK(c[0] == doctest::Approx(1.0));
  c = power_reduction(0.5, 2);
  // C(2,1)(-b)(1-b)/(1-b)^2 and (1-b^2)/(1-b)^2
  CHECK(c[0] == doctest::Approx(-2.0));
  CHECK(c[1] == doctest::Approx(3.0));
  CHECK_THROWS(power_reduction(1.0, 2));
  CHECK_THROWS(power_reduction(0.5, 0));

  const StepLaw law = StepLaw::compound_poisson(1, 1.0, {{0.6, {0.4}, {0.09}}, {0.4, {-1.0}, {0.25}}});
  const double t = 0.7;
  for (int m = 1; m <= 5; ++m) {
    std::vector<double> w = power_reduction(law.beta(t), m);
    for (int k = -3; k <= 3; ++k) {
      std::vector<int> kk = {k};
      Complex rhs = 0.0;
      for (int j = 1; j <= m; ++j) rhs += w[static_cast<std::size_t>(j - 1)] * law.gamma_hat(j * t, kk);
      CHECK(std::abs(std::pow(law.gamma_hat(t, kk), m) - rhs) <= 1e-10);
    }
  }
}

TEST_CASE("fourier table layout") {
  SpatialFourierTable t = SpatialFourierTable::from_scenery(three_arcs(), 2, 2);
  CHECK(t.indices.size() == 25);
  std::vector<int> k = {1, -2};
  CHECK(t.indices[t.position(k)] == IndexTuple{1, -2});
  std::vector<int> out = {3, 0};
  CHECK_THROWS_AS(t.position(out), std::out_of_range);
  SpatialFourierTable r = t.restricted(1);
  CHECK(r.indices.size() == 9);
  std::vector<int> k1 = {1, -1};
  CHECK(r.at(k1) == t.at(k1));
  CHECK(relative_error(t, t) == 0.0);
}

TEST_CASE("synthesis approaches the pointwise correlation") {
  const Scenery s = three_arcs();
  SpatialFourierTable t = SpatialFourierTable::from_scenery(s, 1, 400);
  for (double y : {0.2, 1.0, 2.5}) {
    const PointerTuple p = pointers_1d({y});
    // S_1 is Lipschitz, so the coefficients fall like k^-2
    CHECK(std::abs(synthesize(t, p) - spatial_correlation(s, p)) <= 2e-3);
  }
}

TEST_CASE("multiplier choice") {
  std::mt19937_64 rng(1);
  const StepLaw law = StepLaw::brownian_1d(1.0, 1.0);
  MultiplierSet m = choose_multipliers(law, 0.5, 1, 3, 1e-6, RowScheme::ray, rng);
  CHECK(m.attempts == 1);
  CHECK(m.alpha == std::vector<double>{1.0});
  CHECK(m.min_distance >= 1e-6);

  m = choose_multipliers(law, 0.5, 2, 2, 1e-6, RowScheme::ray, rng, 10);
  CHECK(m.attempts <= 10);
  CHECK(m.attempts > 1);  // equal multipliers give gamma(k1) gamma(k2) = gamma(k2) gamma(k1)
  CHECK(m.min_distance >= 1e-6);

  m = choose_multipliers(law, 0.5, 2, 2, 1e-6, RowScheme::tensor, rng);
  CHECK(m.attempts == 1);

  CHECK_THROWS_AS(choose_multipliers(StepLaw::brownian_1d(0.0, 1.0), 0.5, 1, 2, 1e-6, RowScheme::ray, rng),
                  std::domain_error);
  CHECK_THROWS_AS(choose_multipliers(law, 0.5, 2, 2, 1e-6, RowScheme::ray, rng, 1), BudgetExhausted);
}

TEST_CASE("row powers") {
  CHECK(row_powers(RowScheme::ray, 2, 3) == std::vector<std::vector<int>>{{1, 1}, {2, 2}, {3, 3}});
  std::vector<std::vector<int>> t = row_powers(RowScheme::tensor, 2, 2);
  CHECK(t == std::vector<std::vector<int>>{{1, 1}, {1, 2}, {2, 1}, {2, 2}});
  CHECK_THROWS(row_powers(RowScheme::ray, 0, 2));
}

TEST_CASE("first-order moments equal the transform-side sum") {
  const StepLaw law = StepLaw::brownian_1d(1.0, 1.0);
  const Scenery s = three_arcs();
  const MultiplierSet mult = ones(1, 0.5, 3);
  const TemporalOracle oracle = exact_temporal_oracle(law, s, 60);
  const double s0 = s.measure() / two_pi;
  std::vector<MomentRow> rows = moment_sums(oracle, law, mult, s0, {}, row_powers(RowScheme::ray, 1, 4));
  REQUIRE(rows.size() == 4);
  for (const MomentRow& r : rows) {
    const int m = r.powers[0];
    Complex direct = 0.0;
    for (int k = -12; k <= 12; ++k) {
      std::vector<int> kk = {k};
      direct += std::pow(law.gamma_hat(0.5, kk), m) * std::conj(spatial_fourier(s, kk));
    }
    CHECK(std::abs(r.value - direct.real()) <= 1e-8);
    CHECK(r.std_error == 0.0);
  }
}

TEST_CASE("moments of the empty set and of the whole circle") {
  const StepLaw law = StepLaw::brownian_1d(1.0, 1.0);
  const MultiplierSet mult = ones(1, 0.5, 3);
  const auto powers = row_powers(RowScheme::ray, 1, 5);
  for (const MomentRow& r : moment_sums(exact_temporal_oracle(law, Scenery(1), 40), law, mult, 0.0, {}, powers))
    CHECK(r.value == 0.0);

  // only k = 0 carries weight: S^_1(0) = 2pi
  const Scenery full = Scenery::intervals({{0.0, two_pi}});
  for (const MomentRow& r : moment_sums(exact_temporal_oracle(law, full, 40), law, mult, 1.0, {}, powers))
    CHECK(r.value == doctest::Approx(two_pi).epsilon(1e-10));
}

TEST_CASE("recovery from synthetic moments") {
  const StepLaw law = StepLaw::brownian_1d(1.0, 1.0);
  const int K = 3;
  RecoveryOptions opt;
  const MultiplierSet mult = ones(1, 0.5, K);
  // a real function's coefficients, supported inside the guard band
  SpatialFourierTable truth = SpatialFourierTable::zeros(1, 1, K + opt.guard);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (int k = 0; k <= K + opt.guard; ++k) {
    std::vector<int> kk = {k}, nk = {-k};
    Complex v(n(rng), k == 0 ? 0.0 : n(rng));
    truth.values[truth.position(kk)] = v;
    truth.values[truth.position(nk)] = std::conj(v);
  }
  std::vector<MomentRow> rows;
  for (const auto& p : row_powers(RowScheme::ray, 1, 2 * (2 * (K + opt.guard) + 1))) {
    Complex mu = 0.0;
    for (std::size_t e = 0; e < truth.indices.size(); ++e)
      mu += std::pow(law.gamma_hat(0.5, truth.indices[e]), p[0]) * std::conj(truth.values[e]);
    rows.push_back({p, mu.real(), 0.0});
  }
  Recovery r = recover_spatial_fourier(rows, law, mult, 1, K, opt);
  CHECK(r.trusted);
  // the guard entries carry the conditioning; the kept band is far better
  CHECK(relative_error(r.solved, truth) <= 100 * std::numeric_limits<double>::epsilon() * r.condition);
  CHECK(relative_error(r.table, truth.restricted(K)) <= 1e-6);
}

TEST_CASE("inversion of the half circle") {
  const StepLaw law = StepLaw::brownian_1d(1.0, 1.0);
  const Scenery s = half();
  InversionConfig cfg;
  cfg.cutoffs = {3};
  InversionResult r = invert_spatial_fourier(exact_temporal_oracle(law, s, 60), law, cfg);
  CHECK(r.s0 == doctest::Approx(0.5));
  REQUIRE(r.stages.size() == 1);
  const SpatialFourierTable& t = r.stages[0].recovery.table;

  // S^_1(0) is the integral of S_1, computed here by the midpoint rule
  const int grid = 20000;
  double integral = 0.0;
  for (int i = 0; i < grid; ++i) integral += spatial_correlation(s, pointers_1d({(i + 0.5) * two_pi / grid}));
  integral *= two_pi / grid;
  std::vector<int> zero = {0};
  CHECK(std::abs(t.at(zero) - integral) <= 1e-6);
  CHECK(relative_error(t, SpatialFourierTable::from_scenery(s, 1, 3)) <= 1e-6);
}

TEST_CASE("noise in the moments stays within the conditioning") {
  const StepLaw law = StepLaw::brownian_1d(1.0, 1.0);
  const Scenery s = three_arcs();
  const int K = 3;
  RecoveryOptions opt;
  const MultiplierSet mult = ones(1, 0.5, K);
  const auto powers = row_powers(RowScheme::ray, 1, 2 * (2 * (K + opt.guard) + 1));
  std::vector<MomentRow> rows = moment_sums(exact_temporal_oracle(law, s, 60), law, mult, s.measure() / two_pi, {}, powers);
  Recovery clean = recover_spatial_fourier(rows, law, mult, 1, K, opt);

  const double noise = 1e-9;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-noise, noise);
  for (MomentRow& r : rows) r.value += u(rng);
  Recovery noisy = recover_spatial_fourier(rows, law, mult, 1, K, opt);

  double diff = 0.0;
  for (std::size_t e = 0; e < clean.solved.values.size(); ++e) diff += std::norm(clean.solved.values[e] - noisy.solved.values[e]);
  // column scaling is at most 1 in every column, so the unscaled bound loses
  // one factor of the smallest column maximum
  double min_col = 1.0;
  for (const IndexTuple& k : clean.solved.indices) min_col = std::min(min_col, std::abs(law.gamma_hat(0.5, k)));
  CHECK(std::sqrt(diff) <= noisy.condition * noise * std::sqrt(static_cast<double>(rows.size())) / min_col);
}

TEST_CASE("second-order inversion") {
  const StepLaw law = StepLaw::brownian_1d(1.0, 1.0);
  const Scenery s = three_arcs();
  InversionConfig cfg;
  cfg.max_order = 2;
  cfg.cutoffs = {3, 2};
  InversionResult r = invert_spatial_fourier(exact_temporal_oracle(law, s, 60), law, cfg);
  REQUIRE(r.stages.size() == 2);
  CHECK(r.stages[1].scheme == RowScheme::tensor);
  const SpatialFourierTable& t2 = r.stages[1].recovery.table;
  CHECK(relative_error(t2, SpatialFourierTable::from_scenery(s, 2, 2)) <= 1e-4);

  // the coefficients of a real function pair up under k -> -k
  for (std::size_t e = 0; e < t2.indices.size(); ++e) {
    std::vector<int> neg;
    for (int x : t2.indices[e]) neg.push_back(-x);
    CHECK(std::abs(t2.at(neg) - std::conj(t2.values[e])) <= 1e-12);
  }
}

TEST_CASE("inversion rejects bad configurations") {
  const StepLaw law = StepLaw::brownian_1d(1.0, 1.0);
  const TemporalOracle oracle = exact_temporal_oracle(law, half(), 20);
  InversionConfig cfg;
  cfg.max_order = 2;
  cfg.cutoffs = {3};
  CHECK_THROWS(invert_spatial_fourier(oracle, law, cfg));
  cfg.max_order = 1;
  CHECK_THROWS(invert_spatial_fourier(oracle, StepLaw::brownian_1d(0.0, 1.0), cfg));
}
