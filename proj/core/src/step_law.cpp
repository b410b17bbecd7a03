#include "scenery/step_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace scenery {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string("StepLaw: non-finite ") + what);
}

void require_size(const std::vector<double>& v, int dim, const char* what) {
  if (static_cast<int>(v.size()) != dim)
    throw std::invalid_argument(std::string("StepLaw: ") + what + " has size " +
                                std::to_string(v.size()) + ", expected " + std::to_string(dim));
}

}  // namespace

StepLaw::StepLaw(int dim, std::optional<Brownian> brownian, std::optional<JumpPart> jump)
    : dim_(dim), brownian_(std::move(brownian)), jump_(std::move(jump)) {
  if (dim_ < 1) throw std::invalid_argument("StepLaw: dimension must be positive");
  if (!brownian_ && !jump_) throw std::invalid_argument("StepLaw: needs a Brownian or a jump part");
  if (brownian_) {
    require_size(brownian_->drift, dim_, "drift");
    require_size(brownian_->sigma2, dim_, "sigma2");
    for (double v : brownian_->drift) require_finite(v, "drift");
    for (double s : brownian_->sigma2) {
      require_finite(s, "sigma2");
      if (!(s > 0.0)) throw std::invalid_argument("StepLaw: sigma2 must be positive");
    }
  }
  if (jump_) {
    require_finite(jump_->rate, "rate");
    if (!(jump_->rate > 0.0)) throw std::invalid_argument("StepLaw: jump rate must be positive");
    if (jump_->mixture.empty()) throw std::invalid_argument("StepLaw: empty jump mixture");
    double total = 0.0;
    for (const JumpComponent& c : jump_->mixture) {
      require_finite(c.weight, "weight");
      if (!(c.weight > 0.0)) throw std::invalid_argument("StepLaw: mixture weights must be positive");
      require_size(c.mean, dim_, "jump mean");
      require_size(c.var, dim_, "jump var");
      for (double m : c.mean) require_finite(m, "jump mean");
      for (double v : c.var) {
        require_finite(v, "jump var");
        if (!(v > 0.0)) throw std::invalid_argument("StepLaw: jump variances must be positive");
      }
      total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("StepLaw: mixture weights sum to " + std::to_string(total));
  }
}

StepLaw StepLaw::brownian_1d(double drift, double sigma2) {
  return StepLaw(1, Brownian{{drift}, {sigma2}}, std::nullopt);
}

StepLaw StepLaw::brownian(std::vector<double> drift, std::vector<double> sigma2) {
  int d = static_cast<int>(drift.size());
  return StepLaw(d, Brownian{std::move(drift), std::move(sigma2)}, std::nullopt);
}

StepLaw StepLaw::compound_poisson(int dim, double rate, std::vector<JumpComponent> mixture) {
  return StepLaw(dim, std::nullopt, JumpPart{rate, std::move(mixture)});
}

void StepLaw::check_index(std::span<const int> k) const {
  if (static_cast<int>(k.size()) != dim_)
    throw std::invalid_argument("StepLaw: index has " + std::to_string(k.size()) +
                                " components, expected " + std::to_string(dim_));
}

double StepLaw::beta(double t) const {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("StepLaw: time must be positive");
  if (brownian_) return 0.0;
  return std::exp(-jump_->rate * t);
}

std::complex<double> StepLaw::jump_transform(std::span<const int> k) const {
  check_index(k);
  if (!jump_) return 1.0;
  std::complex<double> h = 0.0;
  for (const JumpComponent& c : jump_->mixture) {
    double phase = 0.0, quad = 0.0;
    for (int i = 0; i < dim_; ++i) {
      double ki = k[static_cast<std::size_t>(i)];
      phase += c.mean[static_cast<std::size_t>(i)] * ki;
      quad += c.var[static_cast<std::size_t>(i)] * ki * ki;
    }
    h += c.weight * std::polar(std::exp(-0.5 * quad), -phase);
  }
  return h;
}

std::complex<double> StepLaw::exponent(std::span<const int> k) const {
  check_index(k);
  std::complex<double> psi = 0.0;
  if (brownian_) {
    double phase = 0.0, quad = 0.0;
    for (int i = 0; i < dim_; ++i) {
      double ki = k[static_cast<std::size_t>(i)];
      phase += brownian_->drift[static_cast<std::size_t>(i)] * ki;
      quad += brownian_->sigma2[static_cast<std::size_t>(i)] * ki * ki;
    }
    psi += std::complex<double>(-0.5 * quad, -phase);
  }
  if (jump_) psi += jump_->rate * (jump_transform(k) - 1.0);
  return psi;
}

std::complex<double> StepLaw::d_hat(double t, std::span<const int> k) const {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("StepLaw: time must be positive");
  return std::exp(t * exponent(k));
}

std::complex<double> StepLaw::gamma_hat(double t, std::span<const int> k) const {
  double b = beta(t);
  std::complex<double> d = d_hat(t, k);
  if (b == 0.0) return d;
  return (d - b) / (1.0 - b);
}

bool StepLaw::is_symmetric() const {
  if (brownian_)
    for (double v : brownian_->drift)
      if (v != 0.0) return false;
  if (!jump_) return true;
  for (const IndexTuple& k : index_box(dim_, 4))
    if (std::abs(jump_transform(k).imag()) > 1e-13) return false;
  return true;
}

double StepLaw::slowest_decay_rate(int cutoff) const {
  if (cutoff < 1) throw std::invalid_argument("slowest_decay_rate: cutoff must be positive");
  double best = std::numeric_limits<double>::infinity();
  for (const IndexTuple& k : index_box(dim_, cutoff)) {
    if (std::all_of(k.begin(), k.end(), [](int v) { return v == 0; })) continue;
    best = std::min(best, -exponent(k).real());
  }
  return best;
}

ScaledCoefficient gamma_hat_scaled(const StepLaw& law, double t0, double alpha, std::span<const int> k) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("gamma_hat_scaled: alpha must be positive");
  double b0 = law.beta(t0);
  std::complex<double> base = law.d_hat(t0, k);
  std::complex<double> psi = law.exponent(k);

  ScaledCoefficient out;
  std::complex<double> d = std::pow(base, alpha);
  double b = b0 == 0.0 ? 0.0 : std::pow(b0, alpha);
  out.value = b == 0.0 ? d : (d - b) / (1.0 - b);
  out.branch_ambiguous = std::abs(t0 * psi.imag()) >= pi * (1.0 - 1e-9) ||
                         std::abs(std::arg(base)) >= pi * (1.0 - 1e-9);
  return out;
}

namespace {

// Enumerate count vectors c with sum n over m slots.
void compositions(int n, int m, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == m - 1) {
    cur.push_back(n);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int c = n; c >= 0; --c) {
    cur.push_back(c);
    compositions(n - c, m, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<GaussianTerm> continuous_terms(const StepLaw& law, double t, double tol) {
  const double b = law.beta(t);
  const std::size_t d = static_cast<std::size_t>(law.dim());
  std::vector<double> base_mean(d, 0.0), base_var(d, 0.0);
  if (law.brownian_part()) {
    for (std::size_t i = 0; i < d; ++i) {
      base_mean[i] = law.brownian_part()->drift[i] * t;
      base_var[i] = law.brownian_part()->sigma2[i] * t;
    }
  }
  if (!law.jump_part()) return {GaussianTerm{1.0, base_mean, base_var}};

  const JumpPart& jp = *law.jump_part();
  const double lt = jp.rate * t;
  const int m = static_cast<int>(jp.mixture.size());
  const int first = law.has_atom() ? 1 : 0;
  const double norm = law.has_atom() ? 1.0 - b : 1.0;

  std::vector<GaussianTerm> terms;
  double covered = 0.0;
  for (int n = 0; n < 2000; ++n) {
    double pn = std::exp(-lt + n * std::log(lt) - std::lgamma(n + 1.0));
    if (n == 0) pn = std::exp(-lt);
    if (n >= first) {
      std::vector<std::vector<int>> comps;
      std::vector<int> cur;
      compositions(n, m, cur, comps);
      for (const auto& c : comps) {
        double logw = std::lgamma(n + 1.0);
        GaussianTerm g{0.0, base_mean, base_var};
        for (int j = 0; j < m; ++j) {
          const JumpComponent& comp = jp.mixture[static_cast<std::size_t>(j)];
          logw += c[static_cast<std::size_t>(j)] * std::log(comp.weight) - std::lgamma(c[static_cast<std::size_t>(j)] + 1.0);
          for (std::size_t i = 0; i < d; ++i) {
            g.mean[i] += c[static_cast<std::size_t>(j)] * comp.mean[i];
            g.var[i] += c[static_cast<std::size_t>(j)] * comp.var[i];
          }
        }
        g.weight = pn * std::exp(logw) / norm;
        if (g.weight > 0.0) terms.push_back(std::move(g));
      }
      if (terms.size() > 200000) throw std::runtime_error("continuous_terms: too many mixture terms");
      covered += pn;
    }
    if (n >= lt && norm - covered <= tol * norm) break;
  }
  return terms;
}

double wrapped_normal_density(double y, double mean, double var) {
  const double sd = std::sqrt(var);
  const double c = 1.0 / (sd * std::sqrt(two_pi));
  const double centre = std::round((mean - y) / two_pi);
  auto term = [&](double j) {
    double z = (y - mean + two_pi * j) / sd;
    return c * std::exp(-0.5 * z * z);
  };
  double total = term(centre);
  for (double step = 1.0;; step += 1.0) {
    double a = term(centre + step), b = term(centre - step);
    total += a + b;
    // Terms decrease monotonically once past the centre.
    if (a + b <= 1e-18 * total || (a + b == 0.0)) break;
    if (step > 1e6) break;
  }
  return total;
}

double gamma_density(const std::vector<GaussianTerm>& terms, std::span<const double> y) {
  double total = 0.0;
  for (const GaussianTerm& g : terms) {
    double p = g.weight;
    for (std::size_t i = 0; i < y.size() && p > 0.0; ++i) p *= wrapped_normal_density(y[i], g.mean[i], g.var[i]);
    total += p;
  }
  return total;
}

IncrementSampler::IncrementSampler(const StepLaw& law, double t) : law_(&law) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("IncrementSampler: time must be non-negative");
  if (law.brownian_part()) {
    for (int i = 0; i < law.dim(); ++i) {
      double m = law.brownian_part()->drift[static_cast<std::size_t>(i)] * t;
      double s = std::sqrt(law.brownian_part()->sigma2[static_cast<std::size_t>(i)] * t);
      brownian_.emplace_back(m, s);
    }
  }
  if (law.jump_part()) {
    count_.emplace(law.jump_part()->rate * t);
    double acc = 0.0;
    for (const JumpComponent& c : law.jump_part()->mixture) cumulative_.push_back(acc += c.weight);
  }
}

void IncrementSampler::add_to(std::span<double> x, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < brownian_.size(); ++i)
    if (brownian_[i].stddev() > 0.0) x[i] += brownian_[i](rng);
  if (!count_ || count_->mean() <= 0.0) return;
  int jumps = (*count_)(rng);
  std::uniform_real_distribution<double> pick(0.0, cumulative_.back());
  std::normal_distribution<double> unit(0.0, 1.0);
  const auto& mix = law_->jump_part()->mixture;
  for (int j = 0; j < jumps; ++j) {
    double u = pick(rng);
    std::size_t c = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) - cumulative_.begin());
    c = std::min(c, mix.size() - 1);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += mix[c].mean[i] + std::sqrt(mix[c].var[i]) * unit(rng);
  }
}

TorusPoint sample_increment(const StepLaw& law, double t, std::mt19937_64& rng) {
  IncrementSampler s(law, t);
  std::vector<double> x(static_cast<std::size_t>(law.dim()), 0.0);
  s.add_to(x, rng);
  return TorusPoint(std::move(x));
}

std::vector<IndexTuple> index_box(int width, int K, IndexCone cone) {
  if (width < 0 || K < 0) throw std::invalid_argument("index_box: negative size");
  const int lo = cone == IndexCone::full ? -K : 0;
  const int span = K - lo + 1;
  double count = std::pow(static_cast<double>(span), width);
  if (count > 5e7) throw std::invalid_argument("index_box: too many indices");
  std::vector<IndexTuple> out;
  out.reserve(static_cast<std::size_t>(count));
  IndexTuple k(static_cast<std::size_t>(width), lo);
  while (true) {
    out.push_back(k);
    int i = width - 1;
    while (i >= 0 && ++k[static_cast<std::size_t>(i)] > K) k[static_cast<std::size_t>(i--)] = lo;
    if (i < 0) break;
  }
  return out;
}

DistinctnessReport distinctness_report(const StepLaw& law, double t, int K, double margin, IndexCone cone) {
  if (!(margin >= 0.0)) throw std::invalid_argument("distinctness_report: margin must be non-negative");
  std::vector<IndexTuple> ks = index_box(law.dim(), K, cone);
  std::vector<std::complex<double>> z;
  z.reserve(ks.size());
  for (const IndexTuple& k : ks) z.push_back(law.gamma_hat(t, k));

  DistinctnessReport r;
  r.count = static_cast<int>(z.size());
  r.min_pairwise_distance = std::numeric_limits<double>::infinity();
  r.min_modulus = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < z.size(); ++a) {
    if (std::abs(z[a]) < r.min_modulus) {
      r.min_modulus = std::abs(z[a]);
      r.smallest = ks[a];
    }
    for (std::size_t b = a + 1; b < z.size(); ++b) {
      double dist = std::abs(z[a] - z[b]);
      if (dist < r.min_pairwise_distance) {
        r.min_pairwise_distance = dist;
        r.closest_a = ks[a];
        r.closest_b = ks[b];
      }
    }
  }
  r.passed = r.min_modulus >= margin && r.min_pairwise_distance >= margin;
  return r;
}

}  // namespace scenery
