#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "scenery/reconstruct.hpp"

using namespace scenery;

namespace {

Scenery half() { return Scenery::intervals({{0.0, pi}}); }
Scenery three_arcs() { return Scenery::intervals({{0.3, 1.5}, {2.2, 3.3}, {4.1, 5.6}}); }

Scenery random_arcs(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, two_pi);
  std::uniform_int_distribution<int> count(1, 3);
  std::vector<double> cuts;
  const int n = count(rng);
  for (int i = 0; i < 2 * n; ++i) cuts.push_back(u(rng));
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::vector<std::pair<double, double>>> arcs;
  for (int i = 0; i < n; ++i) arcs.push_back({{cuts[2 * i], cuts[2 * i + 1]}});
  return Scenery::from_intervals(1, arcs);
}

// Largest number of grid points a translate of the grid puts inside Omega,
// by sweeping the shift across every cell of the arrangement.
std::size_t most_points_inside(const Scenery& s, int m) {
  const double delta = two_pi / m;
  std::vector<double> crit;
  for (const Box& b : s.boxes())
    for (int g = 0; g < m; ++g) {
      crit.push_back(wrap_angle(b[0].lo - g * delta));
      crit.push_back(wrap_angle(b[0].lo + b[0].length - g * delta));
    }
  std::sort(crit.begin(), crit.end());
  crit.push_back(crit.front() + two_pi);
  std::size_t best = 0;
  for (std::size_t i = 0; i + 1 < crit.size(); ++i) {
    const double theta = 0.5 * (crit[i] + crit[i + 1]);
    std::size_t n = 0;
    for (int g = 0; g < m; ++g) n += s.contains(TorusPoint({theta + g * delta})) ? 1 : 0;
    best = std::max(best, n);
  }
  return best;
}

bool translate_fits(const Scenery& s, const GridSubset& g) {
  const double delta = two_pi / g.m;
  for (int step = 0; step < 200000; ++step) {
    const double theta = step * two_pi / 200000;
    bool all = true;
    for (const auto& p : g.points) all = all && s.contains(TorusPoint({theta + p[0] * delta}));
    if (all) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("grid subsets and witnesses") {
  GridSubset g = GridSubset::from_indices(8, 1, {5, 0, 3, 3});
  CHECK(g.linear() == std::vector<int>{0, 3, 5});
  CHECK(witness_steps(g) == std::vector<std::vector<int>>{{3}, {2}});
  PointerTuple y = witness(g);
  REQUIRE(y.size() == 2);
  CHECK(y[0][0] == doctest::Approx(3 * two_pi / 8));
  CHECK_THROWS_AS(GridSubset::from_indices(8, 1, {8}), std::out_of_range);

  GridSubset g2 = GridSubset::from_indices(4, 2, {1, 4});
  CHECK(g2.points == std::vector<std::vector<int>>{{0, 1}, {1, 0}});
  // (1, 0) - (0, 1) wraps the second coordinate forward
  CHECK(witness_steps(g2) == std::vector<std::vector<int>>{{1, 3}});
}

TEST_CASE("grid feasibility") {
  const GridOracle o = exact_grid_oracle(half(), 4);
  CHECK(grid_feasible(o, GridSubset::from_indices(4, 1, {0, 1}), 1e-12));
  CHECK_FALSE(grid_feasible(o, GridSubset::from_indices(4, 1, {0, 1, 2}), 1e-12));
  CHECK_FALSE(grid_feasible(o, GridSubset::from_indices(4, 1, {}), 1e-12));

  // a value within three error bars of zero is rejected
  GridOracle noisy = [](const GridSubset&) { return GridValue{0.1, 0.05}; };
  CHECK_FALSE(grid_feasible(noisy, GridSubset::from_indices(4, 1, {0}), 1e-12));
}

TEST_CASE("maximal grid examples") {
  GridSearchResult r = maximal_grid(exact_grid_oracle(half(), 4), 4, 1);
  CHECK(r.exhaustive);
  CHECK(r.subset.linear() == std::vector<int>{0, 1});

  r = maximal_grid(exact_grid_oracle(Scenery(1), 8), 8, 1);
  CHECK(r.subset.points.empty());

  r = maximal_grid(exact_grid_oracle(Scenery::intervals({{0.0, two_pi}}), 8), 8, 1);
  CHECK(r.subset.points.size() == 8);

  GridSearchOptions tight;
  tight.budget = 3;
  r = maximal_grid(exact_grid_oracle(three_arcs(), 32), 32, 1, tight);
  CHECK(r.budget_exhausted);
  CHECK(r.queries <= 3);

  CHECK_THROWS(maximal_grid(exact_grid_oracle(half(), 4), 1, 1));
}

TEST_CASE("branch and bound finds the largest fitting subset") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 8; ++trial) {
    const Scenery s = random_arcs(rng);
    const int m = 20;
    GridSearchResult r = maximal_grid(exact_grid_oracle(s, m), m, 1);
    CHECK_FALSE(r.exhaustive);
    CHECK_FALSE(r.budget_exhausted);
    CHECK(r.subset.points.size() == most_points_inside(s, m));
    if (!r.subset.points.empty()) {
      CHECK(r.subset.points.front()[0] == 0);
      CHECK(translate_fits(s, r.subset));
    }
  }
}

TEST_CASE("assembled sets") {
  Scenery a = assemble_omega(GridSubset::from_indices(4, 1, {0, 1}));
  CHECK(a.measure() == doctest::Approx(pi));
  CHECK(a.contains(TorusPoint({0.0})));
  CHECK(a.contains(TorusPoint({pi / 2})));
  CHECK_FALSE(a.contains(TorusPoint({pi})));

  // runs that cross zero stay in one arc
  a = assemble_omega(GridSubset::from_indices(8, 1, {0, 7, 4}));
  CHECK(a.measure() == doctest::Approx(3 * two_pi / 8));
  CHECK(a.boundary_count() == 4);

  CHECK(assemble_omega(GridSubset::from_indices(8, 1, {0, 1, 2, 3, 4, 5, 6, 7})).measure() == doctest::Approx(two_pi));
  CHECK(assemble_omega(GridSubset::from_indices(8, 1, {})).measure() == 0.0);
  const double d = two_pi / 4;
  CHECK(assemble_omega(GridSubset::from_indices(4, 2, {0, 5})).measure() == doctest::Approx(2 * d * d));
}

TEST_CASE("pipeline on the half circle") {
  PipelineConfig c;
  c.law = StepLaw::brownian_1d(1.0, 1.0);
  c.scenery = half();
  c.m = 4;
  PipelineResult r = reconstruct(c);
  REQUIRE(r.aligned_distance);
  CHECK(*r.aligned_distance == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(r.diagnostics["mode"] == "exact");
  CHECK(r.diagnostics["exhaustive"].get<bool>());
}

TEST_CASE("pipeline estimates stay within twice the boundary count times the spacing") {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 10; ++trial) {
    const Scenery s = random_arcs(rng);
    for (int m : {8, 16}) {
      PipelineConfig c;
      c.law = StepLaw::brownian_1d(1.0, 1.0);
      c.scenery = s;
      c.m = m;
      PipelineResult r = reconstruct(c);
      REQUIRE(r.aligned_distance);
      const double bound = 2.0 * s.boundary_count() * two_pi / m;
      CHECK(*r.aligned_distance <= bound + 1e-9);
      if (!r.grid.points.empty()) CHECK(translate_fits(s, r.grid));
    }
  }
}

TEST_CASE("symmetric pipeline returns mirror candidates") {
  for (PairSource src : {PairSource::direct, PairSource::sigma}) {
    PipelineConfig c;
    c.law = StepLaw::brownian_1d(0.0, 1.0);
    c.scenery = Scenery::intervals({{0.3, 1.04}, {1.77, 3.35}, {5.24, 5.69}});
    c.m = 16;
    c.mode = ReconstructionMode::symmetric;
    c.pair_source = src;
    PipelineResult r = reconstruct(c);
    REQUIRE(r.candidates.size() == 2);
    CHECK(symmetric_difference(r.candidates[1], r.candidates[0].reflected()) == doctest::Approx(0.0));
    REQUIRE(r.candidate_distances.size() == 2);
    CHECK(*r.aligned_distance == std::min(r.candidate_distances[0], r.candidate_distances[1]));
  }
}

TEST_CASE("pipeline hypothesis checks") {
  PipelineConfig c;
  c.scenery = half();
  c.law = StepLaw::brownian_1d(0.0, 1.0);
  c.mode = ReconstructionMode::exact;
  CHECK_THROWS_AS(reconstruct(c), std::domain_error);

  c.law = StepLaw::brownian_1d(1.0, 1.0);
  c.mode = ReconstructionMode::symmetric;
  CHECK_THROWS_AS(reconstruct(c), std::domain_error);

  c.mode = ReconstructionMode::exact;
  c.m = 1;
  CHECK_THROWS(reconstruct(c));
}

TEST_CASE("inverted pipeline") {
  PipelineConfig c;
  c.law = StepLaw::brownian_1d(1.0, 1.0);
  c.scenery = half();
  c.m = 8;
  c.mode = ReconstructionMode::inverted;
  c.inversion.max_order = 2;
  c.inversion.cutoffs = {3, 2};
  PipelineResult r = reconstruct(c);
  REQUIRE(r.diagnostics["stages"].size() == 2);
  CHECK(r.diagnostics["s0"].get<double>() == doctest::Approx(0.5));
  // three points need the third-order table, which was not recovered
  CHECK(r.grid.points.size() <= 3);
  CHECK(r.diagnostics["unavailable_queries"].get<std::int64_t>() > 0);
}
