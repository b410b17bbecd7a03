#include "scenery/correlations.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include "integrate.hpp"

namespace scenery {

namespace {

using Piece = std::pair<double, double>;

std::vector<Piece> pieces_1d(const Scenery& s) {
  std::vector<Piece> out;
  for (const FlatBox& f : s.fragments()) out.emplace_back(f.lo[0], f.hi[0]);
  std::sort(out.begin(), out.end());
  return out;
}

void shift_pieces(const std::vector<Piece>& in, double offset, std::vector<Piece>& out) {
  out.clear();
  for (const auto& [a, b] : in) {
    double len = b - a;
    double lo = wrap_angle(a + offset);
    double hi = lo + len;
    if (hi <= two_pi) {
      out.emplace_back(lo, hi);
    } else {
      out.emplace_back(lo, two_pi);
      out.emplace_back(0.0, hi - two_pi);
    }
  }
  std::sort(out.begin(), out.end());
}

// Intersection of two sorted lists of disjoint intervals.
void intersect_sorted(const std::vector<Piece>& a, const std::vector<Piece>& b, std::vector<Piece>& out) {
  out.clear();
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    double lo = std::max(a[i].first, b[j].first);
    double hi = std::min(a[i].second, b[j].second);
    if (hi > lo) out.emplace_back(lo, hi);
    if (a[i].second < b[j].second) ++i;
    else ++j;
  }
}

double length_of(const std::vector<Piece>& p) {
  double total = 0.0;
  for (const auto& [a, b] : p) total += b - a;
  return total;
}

// Fast one-dimensional S_n for repeated evaluation.
class Correlation1d {
public:
  explicit Correlation1d(const Scenery& s) : base_(pieces_1d(s)) {}

  double operator()(std::span<const double> y) {
    cur_ = base_;
    double p = 0.0;
    for (double yi : y) {
      p += yi;
      shift_pieces(base_, -p, shifted_);
      intersect_sorted(cur_, shifted_, tmp_);
      cur_.swap(tmp_);
      if (cur_.empty()) return 0.0;
    }
    return length_of(cur_) / two_pi;
  }

private:
  std::vector<Piece> base_, cur_, shifted_, tmp_;
};

// Gaussian images of a mixture wrapped onto the circle, kept while they put
// mass within 9 standard deviations of [0, 2pi].
struct WrappedImages {
  std::vector<double> weight, mean, sd;
};

WrappedImages wrapped_images(const std::vector<GaussianTerm>& terms) {
  WrappedImages w;
  for (const GaussianTerm& g : terms) {
    const double sd = std::sqrt(g.var[0]);
    const long lo = static_cast<long>(std::ceil((-9.0 * sd - g.mean[0]) / two_pi));
    const long hi = static_cast<long>(std::floor((two_pi + 9.0 * sd - g.mean[0]) / two_pi));
    for (long j = lo; j <= hi; ++j) {
      w.weight.push_back(g.weight);
      w.mean.push_back(g.mean[0] + two_pi * static_cast<double>(j));
      w.sd.push_back(sd);
    }
  }
  return w;
}

// Antiderivatives of the wrapped density and of y times it, up to constants
// that cancel on [0, 2pi].
std::pair<double, double> density_moments(const WrappedImages& w, double y) {
  double m0 = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < w.mean.size(); ++i) {
    const double z = (y - w.mean[i]) / w.sd[i];
    const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(two_pi);
    m0 += w.weight[i] * cdf;
    m1 += w.weight[i] * (w.mean[i] * cdf - w.sd[i] * pdf);
  }
  return {m0, m1};
}

void check_times(const TimeTuple& t) {
  for (double ti : t)
    if (!(ti > 0.0) || !std::isfinite(ti)) throw std::invalid_argument("temporal correlation: times must be positive");
}

}  // namespace

double spatial_correlation(const Scenery& s, const PointerTuple& y) {
  const int d = s.dim();
  for (const TorusPoint& p : y)
    if (p.dim() != d) throw std::invalid_argument("spatial_correlation: pointer dimension mismatch");
  if (s.empty()) return 0.0;
  if (d == 1) {
    std::vector<double> ys;
    for (const TorusPoint& p : y) ys.push_back(p[0]);
    return Correlation1d(s)(ys);
  }
  std::vector<FlatBox> cur = s.fragments();
  std::vector<double> partial(static_cast<std::size_t>(d), 0.0), neg(static_cast<std::size_t>(d));
  for (const TorusPoint& p : y) {
    for (int i = 0; i < d; ++i) {
      partial[static_cast<std::size_t>(i)] += p[i];
      neg[static_cast<std::size_t>(i)] = -partial[static_cast<std::size_t>(i)];
    }
    cur = intersect_fragments(cur, shift_fragments(s.fragments(), neg));
    if (cur.empty()) return 0.0;
  }
  return total_volume(cur) / std::pow(two_pi, d);
}

double sigma_correlation(const Scenery& s, std::span<const double> y) {
  if (s.dim() != 1) throw std::invalid_argument("sigma_correlation: one-dimensional sceneries only");
  const std::size_t n = y.size();
  if (n > 24) throw std::invalid_argument("sigma_correlation: order above 24");
  Correlation1d corr(s);
  std::vector<double> signed_y(n);
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (std::size_t i = 0; i < n; ++i) signed_y[i] = (mask >> i & 1U) ? -y[i] : y[i];
    total += corr(signed_y);
  }
  return total;
}

std::complex<double> spatial_fourier(const Scenery& s, std::span<const int> k) {
  const std::size_t d = static_cast<std::size_t>(s.dim());
  if (k.size() % d != 0) throw std::invalid_argument("spatial_fourier: index length not a multiple of the dimension");
  const std::size_t n = k.size() / d;
  const double scale = 1.0 / std::pow(two_pi, static_cast<double>(d));
  std::vector<int> q(d);
  auto block = [&](std::size_t j, std::size_t i) { return (j >= 1 && j <= n) ? k[(j - 1) * d + i] : 0; };
  std::complex<double> value = scale;
  for (std::size_t j = 0; j <= n; ++j) {
    for (std::size_t i = 0; i < d; ++i) q[i] = block(j, i) - block(j + 1, i);
    value *= s.fourier(q);
    if (value == 0.0) break;
  }
  return value;
}

double default_gap(const StepLaw& law) {
  double rate = law.slowest_decay_rate(8);
  if (!(rate > 0.0)) throw std::invalid_argument("default_gap: law does not mix");
  return 2.0 / rate;
}

CorrelationEstimate estimate_temporal(const StepLaw& law, const Scenery& s, const TimeTuple& t,
                                      const MonteCarloOptions& opt) {
  check_times(t);
  if (s.dim() != law.dim()) throw std::invalid_argument("estimate_temporal: dimension mismatch");
  if (opt.blocks < 1) throw std::invalid_argument("estimate_temporal: need at least one block");
  if (opt.segments < 1 || opt.workers < 1) throw std::invalid_argument("estimate_temporal: segments and workers must be positive");
  const double gap = opt.gap ? *opt.gap : default_gap(law);
  if (!(gap >= 0.0) || !std::isfinite(gap)) throw std::invalid_argument("estimate_temporal: gap must be non-negative");

  CorrelationEstimate out;
  out.samples = opt.blocks;
  if (s.empty()) return out;

  const int segments = opt.segments;
  std::vector<std::int64_t> hits(static_cast<std::size_t>(segments), 0);
  std::atomic<int> next{0};
  const std::size_t d = static_cast<std::size_t>(law.dim());

  auto run_segment = [&](int seg) {
    std::int64_t count = opt.blocks / segments + (seg < opt.blocks % segments ? 1 : 0);
    std::mt19937_64 rng(opt.seed + static_cast<std::uint64_t>(seg));
    std::uniform_real_distribution<double> uniform(0.0, two_pi);
    std::vector<IncrementSampler> steps;
    for (double ti : t) steps.emplace_back(law, ti);
    IncrementSampler spacer(law, gap);
    std::vector<double> x(d);
    for (double& v : x) v = uniform(rng);
    std::int64_t local = 0;
    for (std::int64_t b = 0; b < count; ++b) {
      bool all = s.contains(x);
      for (IncrementSampler& st : steps) {
        st.add_to(x, rng);
        for (double& v : x) v = wrap_angle(v);
        all = all && s.contains(x);
      }
      if (all) ++local;
      spacer.add_to(x, rng);
      for (double& v : x) v = wrap_angle(v);
    }
    hits[static_cast<std::size_t>(seg)] = local;
  };

  const int workers = std::min(opt.workers, segments);
  if (workers <= 1) {
    for (int seg = 0; seg < segments; ++seg) run_segment(seg);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int seg = next++; seg < segments; seg = next++) run_segment(seg);
      });
    for (std::thread& th : pool) th.join();
  }

  std::int64_t total = 0;
  for (std::int64_t h : hits) total += h;
  const double J = static_cast<double>(opt.blocks);
  const double p = static_cast<double>(total) / J;
  out.value = p;
  out.std_error = opt.blocks > 1 ? std::sqrt(p * (1.0 - p) / (J - 1.0)) : 0.0;
  return out;
}

CorrelationEstimate estimate_temporal_from_trace(std::span<const double> trace, double dt, const TimeTuple& t,
                                                 double gap) {
  check_times(t);
  if (!(dt > 0.0)) throw std::invalid_argument("estimate_temporal_from_trace: dt must be positive");
  auto to_steps = [dt](double x, const char* what) {
    double r = x / dt;
    double n = std::round(r);
    if (std::abs(r - n) > 1e-6 * std::max(1.0, r))
      throw std::invalid_argument(std::string("estimate_temporal_from_trace: ") + what + " is not a multiple of dt");
    return static_cast<std::int64_t>(n);
  };
  std::vector<std::int64_t> steps;
  std::int64_t span = 0;
  for (double ti : t) {
    std::int64_t k = to_steps(ti, "time");
    if (k < 1) throw std::invalid_argument("estimate_temporal_from_trace: time below dt");
    steps.push_back(k);
    span += k;
  }
  std::int64_t gap_steps = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::llround(gap / dt)));

  double sum = 0.0, sum2 = 0.0;
  std::int64_t blocks = 0;
  const std::int64_t len = static_cast<std::int64_t>(trace.size());
  for (std::int64_t start = 0; start + span < len; start += span + gap_steps) {
    double prod = trace[static_cast<std::size_t>(start)];
    std::int64_t pos = start;
    for (std::int64_t k : steps) {
      pos += k;
      prod *= trace[static_cast<std::size_t>(pos)];
    }
    sum += prod;
    sum2 += prod * prod;
    ++blocks;
  }
  if (blocks == 0) throw std::invalid_argument("estimate_temporal_from_trace: trace shorter than one block");
  CorrelationEstimate out;
  out.samples = blocks;
  out.value = sum / static_cast<double>(blocks);
  if (blocks > 1) {
    double var = (sum2 - sum * out.value) / static_cast<double>(blocks - 1);
    out.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(blocks));
  }
  return out;
}

std::complex<double> weighted_fourier_sum(const Scenery& s, int n, int K,
                                          const std::vector<std::vector<std::complex<double>>>& coeff) {
  if (n < 1 || static_cast<int>(coeff.size()) != n) throw std::invalid_argument("weighted_fourier_sum: bad order");
  const int d = s.dim();
  const std::vector<IndexTuple> box = index_box(d, K);
  const std::size_t B = box.size();
  for (const auto& c : coeff)
    if (c.size() != B) throw std::invalid_argument("weighted_fourier_sum: coefficient table size mismatch");

  // Chain structure: conj(S^_n(k)) = (2pi)^-d F(k_1) prod conj(F(k_j - k_{j+1})) conj(F(k_n)).
  std::vector<std::complex<double>> F(B);
  for (std::size_t b = 0; b < B; ++b) F[b] = s.fourier(box[b]);
  std::vector<std::complex<double>> diff;
  std::vector<int> q(static_cast<std::size_t>(d));
  if (n > 1) {
    diff.resize(B * B);
    for (std::size_t a = 0; a < B; ++a)
      for (std::size_t b = 0; b < B; ++b) {
        for (int i = 0; i < d; ++i)
          q[static_cast<std::size_t>(i)] = box[a][static_cast<std::size_t>(i)] - box[b][static_cast<std::size_t>(i)];
        diff[a * B + b] = std::conj(s.fourier(q));
      }
  }
  std::vector<std::complex<double>> v(B), w(B);
  for (std::size_t b = 0; b < B; ++b) v[b] = coeff[0][b] * F[b];
  for (int j = 1; j < n; ++j) {
    for (std::size_t b = 0; b < B; ++b) {
      std::complex<double> acc = 0.0;
      for (std::size_t a = 0; a < B; ++a) acc += v[a] * diff[a * B + b];
      w[b] = coeff[static_cast<std::size_t>(j)][b] * acc;
    }
    v.swap(w);
  }
  std::complex<double> total = 0.0;
  for (std::size_t b = 0; b < B; ++b) total += v[b] * std::conj(F[b]);
  return total / std::pow(two_pi, d);
}

ExactTemporal exact_temporal_fourier(const StepLaw& law, const Scenery& s, const TimeTuple& t, int K) {
  check_times(t);
  const int n = static_cast<int>(t.size());
  if (n > 4) throw std::invalid_argument("exact_temporal_fourier: order above 4");
  if (K < 0) throw std::invalid_argument("exact_temporal_fourier: negative cutoff");
  if (s.dim() != law.dim()) throw std::invalid_argument("exact_temporal_fourier: dimension mismatch");
  const int d = s.dim();
  const double s0 = s.measure() / std::pow(two_pi, d);

  ExactTemporal out;
  if (n == 0) {
    out.value = s0;
    return out;
  }

  const std::vector<IndexTuple> box = index_box(d, K);
  std::vector<std::vector<std::complex<double>>> coeff(static_cast<std::size_t>(n));
  std::vector<double> beta(static_cast<std::size_t>(n)), mass_in(static_cast<std::size_t>(n)),
      mass_all(static_cast<std::size_t>(n));

  const int K2 = std::max(3 * K, K + 24);
  const bool bound_ok = std::pow(2.0 * K2 + 1.0, d) <= 2e6;
  const std::vector<IndexTuple> wide = bound_ok ? index_box(d, K2) : std::vector<IndexTuple>{};
  for (int i = 0; i < n; ++i) {
    const std::size_t ui = static_cast<std::size_t>(i);
    beta[ui] = law.beta(t[ui]);
    double in = 0.0;
    for (const IndexTuple& k : box) {
      coeff[ui].push_back(law.gamma_hat(t[ui], k));
      in += std::abs(coeff[ui].back());
    }
    mass_in[ui] = in;
    double all = 0.0;
    for (const IndexTuple& k : wide) all += std::abs(law.gamma_hat(t[ui], k));
    mass_all[ui] = all;
  }

  const double mu = s.measure();
  double value = 0.0, bound = 0.0;
  for (unsigned mask = 0; mask < (1U << n); ++mask) {
    double w = 1.0;
    std::vector<std::vector<std::complex<double>>> sub;
    double prod_in = 1.0, prod_all = 1.0;
    for (int i = 0; i < n; ++i) {
      const std::size_t ui = static_cast<std::size_t>(i);
      if (mask >> i & 1U) {
        w *= 1.0 - beta[ui];
        sub.push_back(coeff[ui]);
        prod_in *= mass_in[ui];
        prod_all *= mass_all[ui];
      } else {
        w *= beta[ui];
      }
    }
    if (w == 0.0) continue;
    if (mask == 0) {
      value += w * s0;
      continue;
    }
    const int a = static_cast<int>(sub.size());
    const double scale = std::pow(two_pi, -static_cast<double>(a * d));
    value += w * scale * weighted_fourier_sum(s, a, K, sub).real();
    const double s_max = std::pow(mu, a + 1) / std::pow(two_pi, d);
    bound += bound_ok ? w * scale * s_max * std::max(0.0, prod_all - prod_in)
                      : std::numeric_limits<double>::infinity();
  }
  out.value = value;
  out.truncation_bound = bound;
  return out;
}

double exact_temporal_quadrature(const StepLaw& law, const Scenery& s, const TimeTuple& t, double tol) {
  check_times(t);
  if (s.dim() != 1 || law.dim() != 1) throw std::invalid_argument("exact_temporal_quadrature: one-dimensional only");
  const int n = static_cast<int>(t.size());
  if (n > 2) throw std::invalid_argument("exact_temporal_quadrature: order above 2");
  const double s0 = s.measure() / two_pi;
  if (n == 0) return s0;

  // Kinks of S_1 and S_2 sit at differences of boundary points.
  std::vector<double> ends;
  for (const FlatBox& f : s.fragments()) {
    ends.push_back(f.lo[0]);
    ends.push_back(f.hi[0]);
  }
  std::vector<double> diffs;
  for (double a : ends)
    for (double b : ends) diffs.push_back(wrap_angle(a - b));
  std::sort(diffs.begin(), diffs.end());
  diffs.erase(std::unique(diffs.begin(), diffs.end()), diffs.end());

  std::vector<std::vector<GaussianTerm>> terms;
  std::vector<double> beta;
  for (double ti : t) {
    terms.push_back(continuous_terms(law, ti, 1e-14));
    beta.push_back(law.beta(ti));
  }
  auto density = [&](int i, double y) {
    return gamma_density(terms[static_cast<std::size_t>(i)], std::span<const double>(&y, 1));
  };

  Correlation1d corr(s);
  auto one = [&](int i) {
    auto f = [&](double y) { return corr(std::span<const double>(&y, 1)) * density(i, y); };
    return detail::integrate_pieces(f, 0.0, two_pi, diffs, tol);
  };
  // For fixed y1, S_2(y1, .) is piecewise linear between the breaks, so the
  // inner integral is done in closed form.
  std::vector<WrappedImages> images;
  for (const auto& tr : terms) images.push_back(wrapped_images(tr));
  auto two = [&](int i, int j) {
    const WrappedImages& w = images[static_cast<std::size_t>(j)];
    auto outer = [&](double y1) {
      double g1 = density(i, y1);
      if (g1 == 0.0) return 0.0;
      std::vector<double> breaks = diffs;
      for (double dd : diffs) breaks.push_back(wrap_angle(dd - y1));
      breaks.push_back(0.0);
      breaks.push_back(two_pi);
      std::sort(breaks.begin(), breaks.end());
      breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
      auto at = [&](double y2) {
        double y[2] = {y1, y2};
        return corr(std::span<const double>(y, 2));
      };
      double inner = 0.0;
      double fa = at(breaks[0]);
      auto [m0a, m1a] = density_moments(w, breaks[0]);
      for (std::size_t b = 1; b < breaks.size(); ++b) {
        const double a = breaks[b - 1], x = breaks[b];
        const double fb = at(x);
        const auto [m0b, m1b] = density_moments(w, x);
        const double slope = (fb - fa) / (x - a);
        inner += (fa - slope * a) * (m0b - m0a) + slope * (m1b - m1a);
        fa = fb;
        m0a = m0b;
        m1a = m1b;
      }
      return g1 * inner;
    };
    return detail::integrate_pieces(outer, 0.0, two_pi, diffs, tol);
  };

  double value = 0.0;
  for (unsigned mask = 0; mask < (1U << n); ++mask) {
    double w = 1.0;
    std::vector<int> active;
    for (int i = 0; i < n; ++i) {
      if (mask >> i & 1U) {
        w *= 1.0 - beta[static_cast<std::size_t>(i)];
        active.push_back(i);
      } else {
        w *= beta[static_cast<std::size_t>(i)];
      }
    }
    if (w == 0.0) continue;
    if (active.empty()) value += w * s0;
    else if (active.size() == 1) value += w * one(active[0]);
    else value += w * two(active[0], active[1]);
  }
  return value;
}

}  // namespace scenery
