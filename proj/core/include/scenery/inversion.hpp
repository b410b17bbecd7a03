#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <span>
#include <vector>

#include "scenery/correlations.hpp"
#include "scenery/step_law.hpp"
#include "scenery/vandermonde.hpp"

namespace scenery {

// Values of S^_n on the index box {-K..K}^{n d}, in index_box order.
struct SpatialFourierTable {
  int order = 0;
  int cutoff = 0;
  int dim = 1;
  std::vector<IndexTuple> indices;
  std::vector<Complex> values;

  static SpatialFourierTable zeros(int order, int dim, int cutoff);
  static SpatialFourierTable from_scenery(const Scenery& s, int order, int cutoff);

  std::size_t position(std::span<const int> k) const;  // throws std::out_of_range
  Complex at(std::span<const int> k) const { return values[position(k)]; }
  SpatialFourierTable restricted(int cutoff) const;
};

// ||est - ref|| / ||ref|| over the indices of est (2-norm).
double relative_error(const SpatialFourierTable& est, const SpatialFourierTable& ref);

// S_n(y) rebuilt from the table: (2pi)^{-n d} sum_k S^_n(k) exp(i k.y).
double synthesize(const SpatialFourierTable& table, const PointerTuple& y);

// c'_1..c'_m with gamma^_t(k)^m = sum_j c'_j gamma^_{j t}(k) for beta = beta_t:
//   c'_j = C(m, j) (-beta)^(m-j) (1 - beta^j) / (1 - beta)^m.
// Follows from (1 - beta) gamma^_t = D^_t - beta and D^_t^j = D^_{jt} = beta^j + (1 - beta^j) gamma^_{jt}.
std::vector<double> power_reduction(double beta, int m);

// Row layouts for the moment system. A row is a multi-power (m_1..m_n) and
// reads sum_k prod_i gamma^_{alpha_i t0}(k_i)^{m_i} S^_n(k).
//   ray:    m_1 = ... = m_n = m, m = 1..M (single generator per index)
//   tensor: every (m_1..m_n) in {1..M}^n (conditioning factorizes per axis)
enum class RowScheme { ray, tensor };

struct BudgetExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MultiplierSet {
  double t0 = 0.0;
  std::vector<double> alpha;
  int cutoff = 0;
  double min_distance = 0.0;
  double min_modulus = 0.0;
  int attempts = 0;
};

// Picks alpha_i (all ones first, then uniform draws in [0.5, 2]) until the
// generators separate by margin: product generators for ray rows, per-axis
// coefficients for tensor rows. Throws BudgetExhausted after budget draws.
MultiplierSet choose_multipliers(const StepLaw& law, double t0, int n, int K, double margin,
                                 RowScheme scheme, std::mt19937_64& rng, int budget = 64);

// Source of temporal correlations; an empty tuple returns S_0.
using TemporalOracle = std::function<CorrelationEstimate(const TimeTuple&)>;

TemporalOracle exact_temporal_oracle(const StepLaw& law, const Scenery& s, int K);
// Each query gets its own seed derived from (opt.seed, t), so results do not
// depend on query order.
TemporalOracle monte_carlo_temporal_oracle(const StepLaw& law, const Scenery& s, MonteCarloOptions opt);
TemporalOracle trace_temporal_oracle(std::vector<double> trace, double dt, double gap);

struct MomentRow {
  std::vector<int> powers;
  double value = 0.0;
  double std_error = 0.0;
};

std::vector<std::vector<int>> row_powers(RowScheme scheme, int n, int rows);

// Moment sums mu(m) = sum_k prod_i gamma^_{alpha_i t0}(k_i)^{m_i} S^_n(k).
// lower[j] must hold S^_j for j = 1..n-1 (index 0 unused); s0 is S_0.
std::vector<MomentRow> moment_sums(const TemporalOracle& oracle, const StepLaw& law,
                                   const MultiplierSet& mult, double s0,
                                   const std::vector<SpatialFourierTable>& lower,
                                   const std::vector<std::vector<int>>& powers);

struct RecoveryOptions {
  int guard = 2;              // unknowns live on {-(K+guard)..K+guard}
  double trust_condition = 1e12;
};

struct Recovery {
  SpatialFourierTable table;   // cutoff K
  SpatialFourierTable solved;  // cutoff K + guard
  double residual_norm = 0.0;
  double condition = 0.0;
  bool trusted = false;
};

Recovery recover_spatial_fourier(const std::vector<MomentRow>& moments, const StepLaw& law,
                                 const MultiplierSet& mult, int n, int K, const RecoveryOptions& opt);

struct InversionConfig {
  int max_order = 1;
  std::vector<int> cutoffs;  // K per order, cutoffs[n-1]
  double t0 = 0.5;
  double margin = 1e-6;
  int guard = 2;
  std::optional<RowScheme> scheme;  // default: ray for n = 1, tensor above
  int rows = 0;                     // per axis (tensor) or total (ray); 0 = twice the unknowns per axis
  std::uint64_t seed = 0;
  int multiplier_budget = 64;
  double trust_condition = 1e12;
};

struct InversionStage {
  Recovery recovery;
  MultiplierSet multipliers;
  RowScheme scheme = RowScheme::ray;
  std::size_t moment_count = 0;
  double max_moment_error = 0.0;
};

struct InversionResult {
  double s0 = 0.0;
  std::vector<InversionStage> stages;  // stages[n-1] recovers S^_n
};

InversionResult invert_spatial_fourier(const TemporalOracle& oracle, const StepLaw& law,
                                       const InversionConfig& config);

}  // namespace scenery
