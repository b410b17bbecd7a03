#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenery/inversion.hpp"
#include "scenery/step_law.hpp"
#include "scenery/symmetric.hpp"
#include "scenery/torus.hpp"

namespace scenery {

// Points of the grid (2pi/m) Z^d, coordinates in [0, m), sorted
// lexicographically without duplicates.
struct GridSubset {
  int m = 0;
  int dim = 1;
  std::vector<std::vector<int>> points;

  static GridSubset from_indices(int m, int dim, const std::vector<int>& linear);
  std::vector<int> linear() const;
};

// Forward pointers between consecutive points, each coordinate in [0, m):
// the partial sums revisit every point once, up to a translation.
PointerTuple witness(const GridSubset& g);
std::vector<std::vector<int>> witness_steps(const GridSubset& g);

// S_n at the witness of a subset with a bound on its numerical error; NaN
// when the source cannot answer.
struct GridValue {
  double value = 0.0;
  double error = 0.0;
};
using GridOracle = std::function<GridValue(const GridSubset&)>;

GridOracle exact_grid_oracle(const Scenery& s, int m);
// S(y) + S(-y) computed directly (one dimension).
GridOracle pair_grid_oracle(const Scenery& s, int m);
// Uses synthesized tables; tables[n-1] holds S^_n. Orders above the last
// table answer NaN.
GridOracle fourier_grid_oracle(std::vector<SpatialFourierTable> tables, double s0);
// S(y) + S(-y) from the sigma-based recursion (one dimension).
GridOracle symmetric_grid_oracle(std::shared_ptr<SymmetricRecovery> recovery);

// value > max(threshold, 3 error)
bool grid_feasible(const GridOracle& oracle, const GridSubset& g, double threshold);

struct GridSearchOptions {
  double threshold = 1e-12;
  std::int64_t budget = 2'000'000;  // oracle queries
  int restarts = 8;                 // seeded greedy restarts before branching
  std::uint64_t seed = 0;
};

struct GridSearchResult {
  GridSubset subset;
  std::int64_t queries = 0;
  std::int64_t unavailable = 0;  // queries the oracle could not answer
  std::int64_t nodes = 0;        // branch-and-bound nodes
  bool exhaustive = false;
  bool budget_exhausted = false;
};

// Largest subset whose witness correlation exceeds the threshold; ties go to
// the lexicographically smallest sorted index vector. When the budget runs
// out the best subset found so far is returned and flagged. Full enumeration when
// m^d <= 16, branch and bound otherwise (point 0 fixed by translation; in
// one dimension the first gap is also the smallest, which picks one
// representative per translation class).
GridSearchResult maximal_grid(const GridOracle& oracle, int m, int dim, const GridSearchOptions& opt = {});

// Union of the closed cubes of side 2pi/m centred at the grid points; in one
// dimension neighbouring cells are merged into arcs.
Scenery assemble_omega(const GridSubset& g);

enum class ReconstructionMode { exact, inverted, symmetric };
enum class TemporalSource { exact, monte_carlo };
// Symmetric mode: pair sums evaluated directly, or recovered from sigma_n.
enum class PairSource { direct, sigma };

struct PipelineConfig {
  StepLaw law = StepLaw::brownian_1d(0.0, 1.0);
  std::optional<Scenery> scenery;
  std::vector<double> trace;  // observed values, used when scenery is absent
  double trace_dt = 0.0;
  int m = 16;
  ReconstructionMode mode = ReconstructionMode::exact;
  std::uint64_t seed = 0;
  std::int64_t budget = 2'000'000;
  int shift_resolution = 720;
  bool allow_reflection = false;
  double distinctness_t = 0.5;
  double distinctness_margin = 1e-9;
  int distinctness_cutoff = 3;
  PairSource pair_source = PairSource::direct;
  // inverted mode
  InversionConfig inversion;
  int oracle_cutoff = 60;
  TemporalSource temporal = TemporalSource::exact;
  std::int64_t blocks = 100000;
  int workers = 1;
};

struct PipelineResult {
  Scenery estimate;
  std::vector<Scenery> candidates;
  std::optional<double> aligned_distance;
  std::vector<double> candidate_distances;
  GridSubset grid;
  nlohmann::json diagnostics = nlohmann::json::object();
};

PipelineResult reconstruct(const PipelineConfig& config);

}  // namespace scenery
