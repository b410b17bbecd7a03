#include "scenery/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>

namespace scenery {

namespace {

int box_side(int cutoff) { return 2 * cutoff + 1; }

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_times(std::uint64_t seed, const TimeTuple& t) {
  std::uint64_t h = splitmix(seed);
  for (double v : t) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h = splitmix(h ^ bits);
  }
  return h;
}

double binomial(int m, int j) {
  double r = 1.0;
  for (int i = 1; i <= j; ++i) r = r * (m - j + i) / i;
  return r;
}

}  // namespace

SpatialFourierTable SpatialFourierTable::zeros(int order, int dim, int cutoff) {
  if (order < 1 || dim < 1 || cutoff < 0) throw std::invalid_argument("SpatialFourierTable: bad shape");
  SpatialFourierTable t;
  t.order = order;
  t.dim = dim;
  t.cutoff = cutoff;
  t.indices = index_box(order * dim, cutoff);
  t.values.assign(t.indices.size(), 0.0);
  return t;
}

SpatialFourierTable SpatialFourierTable::from_scenery(const Scenery& s, int order, int cutoff) {
  SpatialFourierTable t = zeros(order, s.dim(), cutoff);
  for (std::size_t i = 0; i < t.indices.size(); ++i) t.values[i] = spatial_fourier(s, t.indices[i]);
  return t;
}

std::size_t SpatialFourierTable::position(std::span<const int> k) const {
  if (static_cast<int>(k.size()) != order * dim) throw std::out_of_range("SpatialFourierTable: index length mismatch");
  std::size_t pos = 0;
  for (int v : k) {
    if (v < -cutoff || v > cutoff) throw std::out_of_range("SpatialFourierTable: index outside the table");
    pos = pos * static_cast<std::size_t>(box_side(cutoff)) + static_cast<std::size_t>(v + cutoff);
  }
  return pos;
}

SpatialFourierTable SpatialFourierTable::restricted(int new_cutoff) const {
  if (new_cutoff > cutoff) throw std::invalid_argument("restricted: cutoff above the table's");
  SpatialFourierTable t = zeros(order, dim, new_cutoff);
  for (std::size_t i = 0; i < t.indices.size(); ++i) t.values[i] = at(t.indices[i]);
  return t;
}

double relative_error(const SpatialFourierTable& est, const SpatialFourierTable& ref) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < est.indices.size(); ++i) {
    Complex r = ref.at(est.indices[i]);
    num += std::norm(est.values[i] - r);
    den += std::norm(r);
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

double synthesize(const SpatialFourierTable& table, const PointerTuple& y) {
  if (static_cast<int>(y.size()) != table.order) throw std::invalid_argument("synthesize: order mismatch");
  std::vector<double> flat;
  for (const TorusPoint& p : y) {
    if (p.dim() != table.dim) throw std::invalid_argument("synthesize: dimension mismatch");
    flat.insert(flat.end(), p.coords().begin(), p.coords().end());
  }
  Complex total = 0.0;
  for (std::size_t i = 0; i < table.indices.size(); ++i) {
    double phase = 0.0;
    for (std::size_t c = 0; c < flat.size(); ++c) phase += table.indices[i][c] * flat[c];
    total += table.values[i] * std::polar(1.0, phase);
  }
  return total.real() / std::pow(two_pi, table.order * table.dim);
}

std::vector<double> power_reduction(double beta, int m) {
  if (m < 1) throw std::invalid_argument("power_reduction: m must be positive");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("power_reduction: beta must lie in [0, 1)");
  std::vector<double> c(static_cast<std::size_t>(m));
  const double denom = std::pow(1.0 - beta, m);
  for (int j = 1; j <= m; ++j)
    c[static_cast<std::size_t>(j - 1)] =
        binomial(m, j) * std::pow(-beta, m - j) * (1.0 - std::pow(beta, j)) / denom;
  return c;
}

MultiplierSet choose_multipliers(const StepLaw& law, double t0, int n, int K, double margin, RowScheme scheme,
                                 std::mt19937_64& rng, int budget) {
  if (n < 1) throw std::invalid_argument("choose_multipliers: order must be positive");
  if (K < 0) throw std::invalid_argument("choose_multipliers: negative cutoff");
  if (budget < 1) throw std::invalid_argument("choose_multipliers: budget must be positive");
  DistinctnessReport base = distinctness_report(law, t0, K, margin);
  if (!base.passed)
    throw std::domain_error("choose_multipliers: step law coefficients are not separated at t0 (min distance " +
                            std::to_string(base.min_pairwise_distance) + ", min modulus " +
                            std::to_string(base.min_modulus) + ")");

  const std::vector<IndexTuple> axis = index_box(law.dim(), K);
  std::uniform_real_distribution<double> draw(0.5, 2.0);
  double best_gap = -1.0;
  for (int attempt = 1; attempt <= budget; ++attempt) {
    std::vector<double> alpha(static_cast<std::size_t>(n), 1.0);
    if (attempt > 1)
      for (double& a : alpha) a = draw(rng);

    MultiplierSet m;
    m.t0 = t0;
    m.alpha = alpha;
    m.cutoff = K;
    m.attempts = attempt;
    m.min_distance = std::numeric_limits<double>::infinity();
    m.min_modulus = std::numeric_limits<double>::infinity();

    std::vector<std::vector<Complex>> coeff(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      for (const IndexTuple& k : axis) coeff[static_cast<std::size_t>(i)].push_back(law.gamma_hat(alpha[static_cast<std::size_t>(i)] * t0, k));

    auto scan = [&](const std::vector<Complex>& z) {
      for (std::size_t a = 0; a < z.size(); ++a) {
        m.min_modulus = std::min(m.min_modulus, std::abs(z[a]));
        for (std::size_t b = a + 1; b < z.size(); ++b) m.min_distance = std::min(m.min_distance, std::abs(z[a] - z[b]));
      }
    };
    if (scheme == RowScheme::tensor || n == 1) {
      for (const auto& z : coeff) scan(z);
    } else {
      std::vector<Complex> z;
      const std::size_t A = axis.size();
      std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
      while (true) {
        Complex p = 1.0;
        for (int i = 0; i < n; ++i) p *= coeff[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]];
        z.push_back(p);
        int i = n - 1;
        while (i >= 0 && ++idx[static_cast<std::size_t>(i)] == A) idx[static_cast<std::size_t>(i--)] = 0;
        if (i < 0) break;
      }
      scan(z);
    }
    if (m.min_distance >= margin && m.min_modulus >= margin) return m;
    best_gap = std::max(best_gap, std::min(m.min_distance, m.min_modulus));
  }
  throw BudgetExhausted("choose_multipliers: no separated multipliers within budget (best separation " +
                        std::to_string(best_gap) + ")");
}

TemporalOracle exact_temporal_oracle(const StepLaw& law, const Scenery& s, int K) {
  return [law, s, K](const TimeTuple& t) {
    CorrelationEstimate e;
    e.value = t.empty() ? s.measure() / std::pow(two_pi, s.dim()) : exact_temporal_fourier(law, s, t, K).value;
    return e;
  };
}

TemporalOracle monte_carlo_temporal_oracle(const StepLaw& law, const Scenery& s, MonteCarloOptions opt) {
  return [law, s, opt](const TimeTuple& t) {
    MonteCarloOptions q = opt;
    q.seed = hash_times(opt.seed, t);
    return estimate_temporal(law, s, t, q);
  };
}

TemporalOracle trace_temporal_oracle(std::vector<double> trace, double dt, double gap) {
  return [trace = std::move(trace), dt, gap](const TimeTuple& t) {
    return estimate_temporal_from_trace(trace, dt, t, gap);
  };
}

std::vector<std::vector<int>> row_powers(RowScheme scheme, int n, int rows) {
  if (n < 1 || rows < 1) throw std::invalid_argument("row_powers: order and rows must be positive");
  std::vector<std::vector<int>> out;
  if (scheme == RowScheme::ray) {
    for (int m = 1; m <= rows; ++m) out.emplace_back(static_cast<std::size_t>(n), m);
    return out;
  }
  std::vector<int> p(static_cast<std::size_t>(n), 1);
  while (true) {
    out.push_back(p);
    int i = n - 1;
    while (i >= 0 && ++p[static_cast<std::size_t>(i)] > rows) p[static_cast<std::size_t>(i--)] = 1;
    if (i < 0) break;
  }
  return out;
}

namespace {

// mu at multi-power (1, ..., 1) and times tau', from T_n(tau') with the
// lower-order subsets removed.
class MomentEvaluator {
public:
  MomentEvaluator(const TemporalOracle& oracle, const StepLaw& law, double s0,
                  const std::vector<SpatialFourierTable>& lower, int n)
      : oracle_(oracle), law_(law), s0_(s0), lower_(lower), n_(n), d_(law.dim()) {}

  CorrelationEstimate at(const TimeTuple& tau) {
    auto it = cache_.find(tau);
    if (it != cache_.end()) return it->second;

    std::vector<double> beta;
    for (double t : tau) beta.push_back(law_.beta(t));
    CorrelationEstimate T = oracle_(tau);

    double lower_sum = 0.0;
    double atom = 1.0;
    for (double b : beta) atom *= (1.0 - b);
    for (unsigned mask = 0; mask + 1 < (1U << n_); ++mask) {
      double w = 1.0;
      std::vector<int> active;
      for (int i = 0; i < n_; ++i) {
        if (mask >> i & 1U) {
          w *= 1.0 - beta[static_cast<std::size_t>(i)];
          active.push_back(i);
        } else {
          w *= beta[static_cast<std::size_t>(i)];
        }
      }
      if (w == 0.0) continue;
      if (active.empty()) {
        lower_sum += w * s0_;
        continue;
      }
      const SpatialFourierTable& tab = lower_.at(active.size());
      if (tab.order != static_cast<int>(active.size()))
        throw std::invalid_argument("moment_sums: missing lower-order table of order " + std::to_string(active.size()));
      Complex acc = 0.0;
      std::vector<int> block(static_cast<std::size_t>(d_));
      for (std::size_t e = 0; e < tab.indices.size(); ++e) {
        Complex term = std::conj(tab.values[e]);
        for (std::size_t a = 0; a < active.size() && term != 0.0; ++a) {
          for (int c = 0; c < d_; ++c) block[static_cast<std::size_t>(c)] = tab.indices[e][a * static_cast<std::size_t>(d_) + static_cast<std::size_t>(c)];
          term *= law_.gamma_hat(tau[static_cast<std::size_t>(active[a])], block);
        }
        acc += term;
      }
      lower_sum += w * acc.real() / std::pow(two_pi, static_cast<double>(active.size()) * d_);
    }
    const double scale = std::pow(two_pi, static_cast<double>(n_ * d_)) / atom;
    CorrelationEstimate out;
    out.value = scale * (T.value - lower_sum);
    out.std_error = scale * T.std_error;
    out.samples = T.samples;
    cache_.emplace(tau, out);
    return out;
  }

private:
  const TemporalOracle& oracle_;
  const StepLaw& law_;
  double s0_;
  const std::vector<SpatialFourierTable>& lower_;
  int n_, d_;
  std::map<TimeTuple, CorrelationEstimate> cache_;
};

}  // namespace

std::vector<MomentRow> moment_sums(const TemporalOracle& oracle, const StepLaw& law, const MultiplierSet& mult,
                                   double s0, const std::vector<SpatialFourierTable>& lower,
                                   const std::vector<std::vector<int>>& powers) {
  const int n = static_cast<int>(mult.alpha.size());
  if (n < 1) throw std::invalid_argument("moment_sums: empty multiplier set");
  if (n > 1 && static_cast<int>(lower.size()) < n)
    throw std::invalid_argument("moment_sums: lower-order tables missing");
  MomentEvaluator eval(oracle, law, s0, lower, n);

  std::vector<double> tau(static_cast<std::size_t>(n)), beta(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    tau[static_cast<std::size_t>(i)] = mult.alpha[static_cast<std::size_t>(i)] * mult.t0;
    beta[static_cast<std::size_t>(i)] = law.beta(tau[static_cast<std::size_t>(i)]);
  }

  std::vector<MomentRow> rows;
  for (const std::vector<int>& m : powers) {
    if (static_cast<int>(m.size()) != n) throw std::invalid_argument("moment_sums: row power length mismatch");
    std::vector<std::vector<double>> c(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) c[static_cast<std::size_t>(i)] = power_reduction(beta[static_cast<std::size_t>(i)], m[static_cast<std::size_t>(i)]);

    // Expand prod_i gamma^_{tau_i}^{m_i} into sums over j_i of gamma^_{j_i tau_i}.
    MomentRow row;
    row.powers = m;
    double var = 0.0;
    std::vector<int> j(static_cast<std::size_t>(n), 1);
    TimeTuple times(static_cast<std::size_t>(n));
    while (true) {
      double w = 1.0;
      for (int i = 0; i < n; ++i) w *= c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j[static_cast<std::size_t>(i)] - 1)];
      if (w != 0.0) {
        for (int i = 0; i < n; ++i) times[static_cast<std::size_t>(i)] = j[static_cast<std::size_t>(i)] * tau[static_cast<std::size_t>(i)];
        CorrelationEstimate e = eval.at(times);
        row.value += w * e.value;
        var += w * w * e.std_error * e.std_error;
      }
      int i = n - 1;
      while (i >= 0 && ++j[static_cast<std::size_t>(i)] > m[static_cast<std::size_t>(i)]) j[static_cast<std::size_t>(i--)] = 1;
      if (i < 0) break;
    }
    row.std_error = std::sqrt(var);
    rows.push_back(std::move(row));
  }
  return rows;
}

Recovery recover_spatial_fourier(const std::vector<MomentRow>& moments, const StepLaw& law, const MultiplierSet& mult,
                                 int n, int K, const RecoveryOptions& opt) {
  if (n < 1 || static_cast<int>(mult.alpha.size()) != n) throw std::invalid_argument("recover_spatial_fourier: order mismatch");
  if (K < 0 || opt.guard < 0) throw std::invalid_argument("recover_spatial_fourier: negative cutoff");
  const int d = law.dim();
  const int Ks = K + opt.guard;
  SpatialFourierTable solved = SpatialFourierTable::zeros(n, d, Ks);
  const std::size_t cols = solved.indices.size();
  if (moments.size() < cols)
    throw std::invalid_argument("recover_spatial_fourier: " + std::to_string(moments.size()) +
                                " moments for " + std::to_string(cols) + " unknowns");

  const std::vector<IndexTuple> axis = index_box(d, Ks);
  const std::size_t A = axis.size();
  int max_power = 1;
  for (const MomentRow& r : moments)
    for (int p : r.powers) max_power = std::max(max_power, p);

  // pw[i][b][p-1] = gamma^_{alpha_i t0}(k_b)^p
  std::vector<std::vector<std::vector<Complex>>> pw(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    pw[static_cast<std::size_t>(i)].resize(A);
    for (std::size_t b = 0; b < A; ++b) {
      Complex g = law.gamma_hat(mult.alpha[static_cast<std::size_t>(i)] * mult.t0, axis[b]);
      Complex p = 1.0;
      for (int e = 0; e < max_power; ++e) pw[static_cast<std::size_t>(i)][b].push_back(p *= g);
    }
  }

  // Column c decomposes into per-axis positions (first axis slowest).
  std::vector<std::vector<std::size_t>> parts(cols, std::vector<std::size_t>(static_cast<std::size_t>(n)));
  for (std::size_t c = 0; c < cols; ++c) {
    std::size_t rest = c;
    for (int i = n - 1; i >= 0; --i) {
      parts[c][static_cast<std::size_t>(i)] = rest % A;
      rest /= A;
    }
  }

  ComplexMatrix V(moments.size(), cols);
  std::vector<Complex> b(moments.size());
  for (std::size_t r = 0; r < moments.size(); ++r) {
    if (static_cast<int>(moments[r].powers.size()) != n) throw std::invalid_argument("recover_spatial_fourier: row length mismatch");
    b[r] = moments[r].value;
    for (std::size_t c = 0; c < cols; ++c) {
      Complex v = 1.0;
      for (int i = 0; i < n; ++i)
        v *= pw[static_cast<std::size_t>(i)][parts[c][static_cast<std::size_t>(i)]][static_cast<std::size_t>(moments[r].powers[static_cast<std::size_t>(i)] - 1)];
      V(r, c) = v;
    }
  }

  LeastSquaresResult ls = solve_least_squares(V, b, opt.trust_condition);
  // The unknowns are conj S^_n(k); S_n is real, so S^_n(-k) = conj S^_n(k).
  std::vector<int> neg;
  for (std::size_t c = 0; c < cols; ++c) {
    neg = solved.indices[c];
    for (int& v : neg) v = -v;
    solved.values[c] = 0.5 * (std::conj(ls.x[c]) + ls.x[solved.position(neg)]);
  }

  Recovery out;
  out.table = solved.restricted(K);
  out.solved = std::move(solved);
  out.residual_norm = ls.residual_norm;
  out.condition = ls.condition;
  out.trusted = ls.trusted;
  return out;
}

InversionResult invert_spatial_fourier(const TemporalOracle& oracle, const StepLaw& law, const InversionConfig& config) {
  if (config.max_order < 1) throw std::invalid_argument("invert_spatial_fourier: max_order must be positive");
  if (static_cast<int>(config.cutoffs.size()) < config.max_order)
    throw std::invalid_argument("invert_spatial_fourier: one cutoff per order required");
  if (!(config.t0 > 0.0)) throw std::invalid_argument("invert_spatial_fourier: t0 must be positive");

  InversionResult result;
  result.s0 = oracle({}).value;
  std::mt19937_64 rng(config.seed);
  std::vector<SpatialFourierTable> lower(1);
  const int d = law.dim();

  for (int n = 1; n <= config.max_order; ++n) {
    const int K = config.cutoffs[static_cast<std::size_t>(n - 1)];
    const int Ks = K + config.guard;
    InversionStage stage;
    stage.scheme = config.scheme ? *config.scheme : (n == 1 ? RowScheme::ray : RowScheme::tensor);
    stage.multipliers = choose_multipliers(law, config.t0, n, Ks, config.margin, stage.scheme, rng,
                                           config.multiplier_budget);

    const double per_axis = std::pow(box_side(Ks), d);
    int rows = config.rows;
    if (rows <= 0)
      rows = static_cast<int>(2.0 * (stage.scheme == RowScheme::ray ? std::pow(per_axis, n) : per_axis));
    std::vector<MomentRow> moments =
        moment_sums(oracle, law, stage.multipliers, result.s0, lower, row_powers(stage.scheme, n, rows));
    stage.moment_count = moments.size();
    for (const MomentRow& m : moments) stage.max_moment_error = std::max(stage.max_moment_error, m.std_error);

    RecoveryOptions ro;
    ro.guard = config.guard;
    ro.trust_condition = config.trust_condition;
    stage.recovery = recover_spatial_fourier(moments, law, stage.multipliers, n, K, ro);
    lower.push_back(stage.recovery.solved);
    result.stages.push_back(std::move(stage));
  }
  return result;
}

}  // namespace scenery
