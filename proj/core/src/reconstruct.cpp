#include "scenery/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace scenery {

namespace {

int grid_size(int m, int dim) {
  long n = 1;
  for (int i = 0; i < dim; ++i) {
    n *= m;
    if (n > (1L << 22)) throw std::invalid_argument("grid: m^d too large");
  }
  return static_cast<int>(n);
}

std::vector<int> unravel(int idx, int m, int dim) {
  std::vector<int> p(static_cast<std::size_t>(dim));
  for (int i = dim; i-- > 0;) {
    p[static_cast<std::size_t>(i)] = idx % m;
    idx /= m;
  }
  return p;
}

int ravel(const std::vector<int>& p, int m) {
  int idx = 0;
  for (int c : p) idx = idx * m + c;
  return idx;
}

}  // namespace

GridSubset GridSubset::from_indices(int m, int dim, const std::vector<int>& linear) {
  if (m < 1 || dim < 1) throw std::invalid_argument("GridSubset: bad grid");
  const int total = grid_size(m, dim);
  GridSubset g{m, dim, {}};
  std::vector<int> sorted = linear;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (int i : sorted) {
    if (i < 0 || i >= total) throw std::out_of_range("GridSubset: index outside the grid");
    g.points.push_back(unravel(i, m, dim));
  }
  return g;
}

std::vector<int> GridSubset::linear() const {
  std::vector<int> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(ravel(p, m));
  return out;
}

std::vector<std::vector<int>> witness_steps(const GridSubset& g) {
  std::vector<std::vector<int>> steps;
  for (std::size_t j = 1; j < g.points.size(); ++j) {
    std::vector<int> s(static_cast<std::size_t>(g.dim));
    for (int i = 0; i < g.dim; ++i) {
      auto u = static_cast<std::size_t>(i);
      s[u] = ((g.points[j][u] - g.points[j - 1][u]) % g.m + g.m) % g.m;
    }
    steps.push_back(std::move(s));
  }
  return steps;
}

PointerTuple witness(const GridSubset& g) {
  const double delta = two_pi / g.m;
  PointerTuple y;
  for (const auto& s : witness_steps(g)) {
    std::vector<double> c;
    for (int v : s) c.push_back(v * delta);
    y.emplace_back(std::move(c));
  }
  return y;
}

namespace {

constexpr GridValue unavailable{std::numeric_limits<double>::quiet_NaN(), 0.0};

std::vector<int> coords_1d(const GridSubset& g) {
  std::vector<int> pts;
  for (const auto& p : g.points) pts.push_back(p[0]);
  return pts;
}

bool accept(const GridValue& v, double threshold) {
  return std::isfinite(v.value) && v.value > std::max(threshold, 3.0 * v.error);
}

}  // namespace

GridOracle exact_grid_oracle(const Scenery& s, int m) {
  if (s.dim() == 1) {
    auto grid = std::make_shared<GridCorrelation>(s, m);
    return [grid](const GridSubset& g) {
      if (g.points.empty()) return unavailable;
      return GridValue{grid->points_correlation(coords_1d(g)), 0.0};
    };
  }
  return [s](const GridSubset& g) {
    if (g.points.empty()) return unavailable;
    return GridValue{spatial_correlation(s, witness(g)), 0.0};
  };
}

GridOracle pair_grid_oracle(const Scenery& s, int m) {
  if (s.dim() != 1) throw std::invalid_argument("pair_grid_oracle: one-dimensional sceneries only");
  auto grid = std::make_shared<GridCorrelation>(s, m);
  return [grid](const GridSubset& g) {
    if (g.points.empty()) return unavailable;
    std::vector<int> pts = coords_1d(g), neg;
    for (int p : pts) neg.push_back(-p);
    return GridValue{grid->points_correlation(pts) + grid->points_correlation(neg), 0.0};
  };
}

GridOracle fourier_grid_oracle(std::vector<SpatialFourierTable> tables, double s0) {
  return [tables = std::move(tables), s0](const GridSubset& g) {
    if (g.points.empty()) return unavailable;
    const std::size_t n = g.points.size() - 1;
    if (n == 0) return GridValue{s0, 0.0};
    if (n > tables.size()) return unavailable;
    return GridValue{synthesize(tables[n - 1], witness(g)), 0.0};
  };
}

GridOracle symmetric_grid_oracle(std::shared_ptr<SymmetricRecovery> recovery) {
  return [recovery](const GridSubset& g) {
    if (g.points.empty() || g.dim != 1) return unavailable;
    std::vector<int> k;
    for (const auto& s : witness_steps(g)) k.push_back(s[0]);
    SymmetricRecovery::Value v = recovery->evaluate(k);
    return GridValue{v.value, v.error};
  };
}

bool grid_feasible(const GridOracle& oracle, const GridSubset& g, double threshold) {
  return accept(oracle(g), threshold);
}

namespace {

class Search {
public:
  Search(const GridOracle& oracle, int m, int dim, const GridSearchOptions& opt)
      : oracle_(oracle), m_(m), dim_(dim), opt_(opt), total_(grid_size(m, dim)) {}

  GridSearchResult run() {
    GridSearchResult r;
    try {
      if (total_ <= 16) {
        r.exhaustive = true;
        enumerate();
      } else {
        branch_and_bound();
      }
    } catch (const OutOfBudget&) {
      r.budget_exhausted = true;
    }
    r.subset = GridSubset::from_indices(m_, dim_, best_);
    r.queries = queries_;
    r.unavailable = unavailable_;
    r.nodes = nodes_;
    return r;
  }

private:
  struct OutOfBudget {};

  bool feasible(const std::vector<int>& set) {
    auto it = memo_.find(set);
    if (it != memo_.end()) return it->second;
    if (queries_ >= opt_.budget) throw OutOfBudget{};
    ++queries_;
    const GridValue v = oracle_(GridSubset::from_indices(m_, dim_, set));
    if (!std::isfinite(v.value)) ++unavailable_;
    const bool ok = accept(v, opt_.threshold);
    memo_.emplace(set, ok);
    return ok;
  }

  void offer(const std::vector<int>& set) {
    if (set.size() > best_.size() || (set.size() == best_.size() && set < best_)) best_ = set;
  }

  void enumerate() {
    std::vector<int> set;
    for (std::uint32_t mask = 1; mask < (1u << total_); ++mask) {
      set.clear();
      for (int i = 0; i < total_; ++i)
        if (mask & (1u << i)) set.push_back(i);
      if (set.size() < best_.size()) continue;
      if (feasible(set)) offer(set);
    }
  }

  // Can a set extending prefix with bound points beat the incumbent?
  bool promising(const std::vector<int>& prefix, std::size_t bound) const {
    if (bound != best_.size()) return bound > best_.size();
    for (std::size_t i = 0; i < prefix.size(); ++i) {
      if (prefix[i] != best_[i]) return prefix[i] < best_[i];
    }
    return true;
  }

  // One dimension: a translation class is searched through the member
  // whose first gap is its smallest gap, wrap included. Once cur holds two
  // points that gap is fixed and every later point must keep its distance.
  bool canonical_next(const std::vector<int>& cur, int p) const {
    if (dim_ != 1) return true;
    const int g = cur.size() >= 2 ? cur[1] - cur[0] : p - cur[0];
    return p - cur.back() >= g && m_ - p >= g;
  }

  void branch_and_bound() {
    std::vector<int> cur{0};
    if (!feasible(cur)) return;
    best_ = cur;
    // Greedy seed.
    std::vector<int> greedy = cur;
    for (int i = 1; i < total_; ++i) {
      greedy.push_back(i);
      if (!feasible(greedy)) greedy.pop_back();
    }
    offer(greedy);
    std::mt19937_64 rng(opt_.seed);
    std::vector<int> order;
    for (int i = 1; i < total_; ++i) order.push_back(i);
    for (int r = 0; r < opt_.restarts; ++r) {
      std::shuffle(order.begin(), order.end(), rng);
      std::vector<int> g = cur;
      for (int i : order) {
        std::vector<int> trial = g;
        trial.insert(std::upper_bound(trial.begin(), trial.end(), i), i);
        if (feasible(trial)) g = std::move(trial);
      }
      offer(g);
    }
    std::vector<int> cand;
    for (int i = 1; i < total_; ++i) {
      if (feasible({0, i})) cand.push_back(i);
    }
    expand(cur, cand);
  }

  void expand(std::vector<int>& cur, const std::vector<int>& cand) {
    ++nodes_;
    if (!promising(cur, cur.size() + cand.size())) return;
    if (cand.empty()) {
      offer(cur);
      return;
    }
    std::vector<int> all = cur;
    all.insert(all.end(), cand.begin(), cand.end());
    if (feasible(all)) {
      offer(all);
      return;
    }
    // Pairwise compatibility given cur; a feasible extension is a clique.
    // With the first gap fixed, pairs that break it count as incompatible.
    const std::size_t c = cand.size();
    std::vector<std::vector<char>> ok(c, std::vector<char>(c, 0));
    for (std::size_t i = 0; i < c; ++i) {
      cur.push_back(cand[i]);
      for (std::size_t j = i + 1; j < c; ++j) {
        if (cur.size() >= 3 && !canonical_next(cur, cand[j])) continue;
        cur.push_back(cand[j]);
        ok[i][j] = ok[j][i] = feasible(cur) ? 1 : 0;
        cur.pop_back();
      }
      cur.pop_back();
    }
    // Greedy colouring of each suffix into mutually incompatible classes;
    // a clique takes at most one point per class.
    std::vector<std::size_t> bound(c);
    std::vector<std::vector<std::size_t>> classes;
    for (std::size_t i = c; i-- > 0;) {
      bool placed = false;
      for (auto& cls : classes) {
        if (std::none_of(cls.begin(), cls.end(), [&](std::size_t u) { return ok[i][u]; })) {
          cls.push_back(i);
          placed = true;
          break;
        }
      }
      if (!placed) classes.push_back({i});
      bound[i] = classes.size();
    }
    for (std::size_t i = 0; i < c; ++i) {
      if (!promising(cur, cur.size() + bound[i])) return;
      if (!canonical_next(cur, cand[i])) continue;
      cur.push_back(cand[i]);
      std::vector<int> next;
      for (std::size_t j = i + 1; j < c; ++j)
        if (ok[i][j] && canonical_next(cur, cand[j])) next.push_back(cand[j]);
      expand(cur, next);
      cur.pop_back();
    }
  }

  const GridOracle& oracle_;
  int m_, dim_;
  GridSearchOptions opt_;
  int total_;
  std::int64_t queries_ = 0;
  std::int64_t unavailable_ = 0;
  std::int64_t nodes_ = 0;
  std::map<std::vector<int>, bool> memo_;
  std::vector<int> best_;
};

}  // namespace

GridSearchResult maximal_grid(const GridOracle& oracle, int m, int dim, const GridSearchOptions& opt) {
  if (m < 2) throw std::invalid_argument("maximal_grid: m must be at least 2");
  if (dim < 1) throw std::invalid_argument("maximal_grid: bad dimension");
  return Search(oracle, m, dim, opt).run();
}

Scenery assemble_omega(const GridSubset& g) {
  if (g.points.empty()) return Scenery(g.dim);
  const double delta = two_pi / g.m;
  std::vector<std::vector<std::pair<double, double>>> boxes;
  if (g.dim == 1) {
    std::vector<char> on(static_cast<std::size_t>(g.m), 0);
    for (const auto& p : g.points) on[static_cast<std::size_t>(p[0])] = 1;
    if (static_cast<int>(g.points.size()) == g.m) return Scenery::intervals({{0.0, two_pi}});
    // Start right after an empty cell so runs do not straddle the scan start.
    int start = 0;
    while (on[static_cast<std::size_t>(start)]) ++start;
    for (int i = 1; i <= g.m; ++i) {
      int c = (start + i) % g.m;
      if (!on[static_cast<std::size_t>(c)]) continue;
      int len = 0;
      while (on[static_cast<std::size_t>((c + len) % g.m)]) ++len;
      const double lo = (start + i - 0.5) * delta;
      boxes.push_back({{lo, lo + len * delta}});
      i += len - 1;
    }
    return Scenery::from_intervals(1, boxes);
  }
  for (const auto& p : g.points) {
    std::vector<std::pair<double, double>> b;
    for (int c : p) b.emplace_back((c - 0.5) * delta, (c + 0.5) * delta);
    boxes.push_back(std::move(b));
  }
  return Scenery::from_intervals(g.dim, boxes);
}

namespace {

const char* mode_name(ReconstructionMode m) {
  switch (m) {
    case ReconstructionMode::exact: return "exact";
    case ReconstructionMode::inverted: return "inverted";
    case ReconstructionMode::symmetric: return "symmetric";
  }
  return "?";
}

// Synthesis tail proxy: (2pi)^{-nd} times the mass on the outermost shell.
double tail_proxy(const SpatialFourierTable& t) {
  double sum = 0.0;
  for (std::size_t i = 0; i < t.indices.size(); ++i) {
    int top = 0;
    for (int v : t.indices[i]) top = std::max(top, std::abs(v));
    if (top == t.cutoff) sum += std::abs(t.values[i]);
  }
  return sum / std::pow(two_pi, t.order * t.dim);
}

}  // namespace

PipelineResult reconstruct(const PipelineConfig& cfg) {
  const int d = cfg.law.dim();
  if (cfg.m < 2) throw std::invalid_argument("reconstruct: m must be at least 2");
  if (cfg.scenery && cfg.scenery->dim() != d) throw std::invalid_argument("reconstruct: scenery and law dimensions differ");

  // Hypothesis check on the law before any simulation.
  const IndexCone cone = cfg.mode == ReconstructionMode::symmetric ? IndexCone::nonnegative : IndexCone::full;
  if (cfg.mode == ReconstructionMode::symmetric && (!cfg.law.is_symmetric() || d != 1))
    throw std::domain_error("reconstruct: symmetric mode needs a symmetric one-dimensional law");
  const DistinctnessReport dist =
      distinctness_report(cfg.law, cfg.distinctness_t, cfg.distinctness_cutoff, cfg.distinctness_margin, cone);
  if (!dist.passed)
    throw std::domain_error("reconstruct: transforms of the step law are not distinct and nonzero");

  PipelineResult out;
  nlohmann::json& diag = out.diagnostics;
  diag["mode"] = mode_name(cfg.mode);
  diag["m"] = cfg.m;
  diag["distinctness"] = {{"count", dist.count},
                          {"min_pairwise_distance", dist.min_pairwise_distance},
                          {"min_modulus", dist.min_modulus}};

  GridOracle oracle;
  GridSearchOptions search;
  search.budget = cfg.budget;
  search.seed = cfg.seed;
  std::shared_ptr<SymmetricRecovery> recovery;

  switch (cfg.mode) {
    case ReconstructionMode::exact: {
      if (!cfg.scenery) throw std::invalid_argument("reconstruct: exact mode needs a scenery");
      oracle = exact_grid_oracle(*cfg.scenery, cfg.m);
      break;
    }
    case ReconstructionMode::symmetric: {
      if (!cfg.scenery) throw std::invalid_argument("reconstruct: symmetric mode needs a scenery");
      if (cfg.pair_source == PairSource::direct) {
        oracle = pair_grid_oracle(*cfg.scenery, cfg.m);
      } else {
        auto grid = std::make_shared<GridCorrelation>(*cfg.scenery, cfg.m);
        recovery = std::make_shared<SymmetricRecovery>(
            [grid](std::span<const int> k) { return grid->sigma(k); }, cfg.m);
        oracle = symmetric_grid_oracle(recovery);
      }
      diag["pair_source"] = cfg.pair_source == PairSource::direct ? "direct" : "sigma";
      break;
    }
    case ReconstructionMode::inverted: {
      InversionConfig inv = cfg.inversion;
      inv.seed = cfg.seed;
      if (inv.max_order > 2) throw std::invalid_argument("reconstruct: inverted mode supports orders up to 2");
      TemporalOracle temporal;
      if (cfg.scenery) {
        if (cfg.temporal == TemporalSource::exact) {
          temporal = exact_temporal_oracle(cfg.law, *cfg.scenery, cfg.oracle_cutoff);
        } else {
          MonteCarloOptions mc;
          mc.blocks = cfg.blocks;
          mc.seed = cfg.seed;
          mc.workers = cfg.workers;
          temporal = monte_carlo_temporal_oracle(cfg.law, *cfg.scenery, mc);
        }
      } else {
        if (cfg.trace.empty() || !(cfg.trace_dt > 0.0))
          throw std::invalid_argument("reconstruct: needs a scenery or a trace with positive dt");
        temporal = trace_temporal_oracle(cfg.trace, cfg.trace_dt, default_gap(cfg.law));
      }
      InversionResult res = invert_spatial_fourier(temporal, cfg.law, inv);
      std::vector<SpatialFourierTable> tables;
      double tau = 0.0;
      nlohmann::json stages = nlohmann::json::array();
      for (const InversionStage& st : res.stages) {
        tables.push_back(st.recovery.table);
        tau = std::max(tau, 3.0 * tail_proxy(st.recovery.table));
        stages.push_back({{"order", st.recovery.table.order},
                          {"cutoff", st.recovery.table.cutoff},
                          {"condition", st.recovery.condition},
                          {"trusted", st.recovery.trusted},
                          {"residual", st.recovery.residual_norm},
                          {"max_moment_error", st.max_moment_error}});
      }
      diag["stages"] = stages;
      diag["s0"] = res.s0;
      search.threshold = std::max(tau, 1e-12);
      oracle = fourier_grid_oracle(std::move(tables), res.s0);
      break;
    }
  }

  GridSearchResult found = maximal_grid(oracle, cfg.m, d, search);
  diag["threshold"] = search.threshold;
  diag["queries"] = found.queries;
  diag["unavailable_queries"] = found.unavailable;
  diag["search_nodes"] = found.nodes;
  diag["exhaustive"] = found.exhaustive;
  diag["budget_exhausted"] = found.budget_exhausted;
  diag["grid_points"] = found.subset.linear();
  if (recovery) diag["sigma_queries"] = recovery->oracle_calls();
  if (found.subset.points.empty() && found.budget_exhausted) diag["warning"] = "budget exhausted before any feasible subset";

  out.grid = found.subset;
  out.estimate = assemble_omega(found.subset);
  if (found.subset.points.empty()) out.estimate = Scenery(d);
  out.candidates.push_back(out.estimate);
  if (cfg.mode == ReconstructionMode::symmetric) out.candidates.push_back(out.estimate.reflected());

  if (cfg.scenery) {
    const bool reflect = cfg.allow_reflection && cfg.mode != ReconstructionMode::symmetric;
    for (const Scenery& c : out.candidates)
      out.candidate_distances.push_back(aligned_distance(c, *cfg.scenery, cfg.shift_resolution, false).distance);
    Alignment a = aligned_distance(out.estimate, *cfg.scenery, cfg.shift_resolution, reflect);
    out.aligned_distance = cfg.mode == ReconstructionMode::symmetric
                               ? *std::min_element(out.candidate_distances.begin(), out.candidate_distances.end())
                               : a.distance;
    diag["shift"] = a.shift;
    diag["reflected"] = a.reflected;
  }
  return out;
}

}  // namespace scenery
