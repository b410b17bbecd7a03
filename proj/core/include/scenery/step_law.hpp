#pragma once

#include <complex>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "scenery/torus.hpp"

namespace scenery {

using IndexTuple = std::vector<int>;

struct Brownian {
  std::vector<double> drift;
  std::vector<double> sigma2;  // per-coordinate variance rate, all > 0
};

struct JumpComponent {
  double weight = 1.0;
  std::vector<double> mean;
  std::vector<double> var;  // all > 0
};

struct JumpPart {
  double rate = 0.0;  // Poisson rate lambda > 0
  std::vector<JumpComponent> mixture;
};

// Levy step law on the torus: optional Brownian part plus optional compound
// Poisson part with a Gaussian-mixture jump law. At least one part is present.
//
// Transform convention: g^(k) = integral of g(x) exp(-i k.x) dx, so
// D^_t(k) = exp(t psi(k)) with
//   psi(k) = -i v.k - 1/2 sum_j sigma2_j k_j^2 + lambda (h^(k) - 1).
// D_t = beta_t delta_0 + (1 - beta_t) gamma_t, beta_t = exp(-lambda t) for a
// pure jump law and 0 as soon as a Brownian part is present.
class StepLaw {
public:
  StepLaw(int dim, std::optional<Brownian> brownian, std::optional<JumpPart> jump);

  static StepLaw brownian_1d(double drift, double sigma2);
  static StepLaw brownian(std::vector<double> drift, std::vector<double> sigma2);
  static StepLaw compound_poisson(int dim, double rate, std::vector<JumpComponent> mixture);

  int dim() const { return dim_; }
  const std::optional<Brownian>& brownian_part() const { return brownian_; }
  const std::optional<JumpPart>& jump_part() const { return jump_; }

  bool has_atom() const { return !brownian_.has_value(); }
  double beta(double t) const;

  std::complex<double> jump_transform(std::span<const int> k) const;
  std::complex<double> exponent(std::span<const int> k) const;
  std::complex<double> d_hat(double t, std::span<const int> k) const;
  std::complex<double> gamma_hat(double t, std::span<const int> k) const;

  // True when every coefficient is real (the law is symmetric).
  bool is_symmetric() const;
  // min over 0 < max|k_i| <= cutoff of -Re psi(k).
  double slowest_decay_rate(int cutoff = 8) const;

private:
  void check_index(std::span<const int> k) const;

  int dim_;
  std::optional<Brownian> brownian_;
  std::optional<JumpPart> jump_;
};

struct ScaledCoefficient {
  std::complex<double> value;
  // Set when t0 |Im psi(k)| reaches pi: the principal power of the base no
  // longer equals the coefficient at alpha t0.
  bool branch_ambiguous = false;
};

// gamma^ at alpha t0 built from the base quantities D^_{t0}, beta_{t0}
// through principal powers.
ScaledCoefficient gamma_hat_scaled(const StepLaw& law, double t0, double alpha,
                                   std::span<const int> k);

// One Gaussian term of the continuous part gamma_t, before wrapping.
struct GaussianTerm {
  double weight;
  std::vector<double> mean;
  std::vector<double> var;
};

// gamma_t as a normalized mixture of Gaussians on R^d. Poisson and
// composition weights are truncated once the dropped mass is below tol.
std::vector<GaussianTerm> continuous_terms(const StepLaw& law, double t, double tol = 1e-15);

double wrapped_normal_density(double y, double mean, double var);

// Density of gamma_t at y (wrapped onto the torus).
double gamma_density(const std::vector<GaussianTerm>& terms, std::span<const double> y);

// gamma^_t(k) by adaptive Gauss-Kronrod quadrature of the wrapped density.
std::complex<double> quadrature_gamma_hat(const StepLaw& law, double t, std::span<const int> k,
                                          double tol = 1e-13);

// Draws increments X_{s+t} - X_s (not wrapped).
class IncrementSampler {
public:
  IncrementSampler(const StepLaw& law, double t);
  void add_to(std::span<double> x, std::mt19937_64& rng);

private:
  const StepLaw* law_;
  std::vector<std::normal_distribution<double>> brownian_;
  std::optional<std::poisson_distribution<int>> count_;
  std::vector<double> cumulative_;
};

TorusPoint sample_increment(const StepLaw& law, double t, std::mt19937_64& rng);

enum class IndexCone { full, nonnegative };

// All tuples in {-K..K}^width (full) or {0..K}^width (nonnegative), first
// coordinate varying slowest.
std::vector<IndexTuple> index_box(int width, int K, IndexCone cone = IndexCone::full);

struct DistinctnessReport {
  int count = 0;
  double min_pairwise_distance = 0.0;
  IndexTuple closest_a, closest_b;
  double min_modulus = 0.0;
  IndexTuple smallest;
  bool passed = false;
};

// Checks that gamma^_t(k), k in the index box, are pairwise separated and
// bounded away from zero by margin.
DistinctnessReport distinctness_report(const StepLaw& law, double t, int K, double margin,
                                       IndexCone cone = IndexCone::full);

}  // namespace scenery
