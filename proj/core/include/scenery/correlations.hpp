#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "scenery/step_law.hpp"
#include "scenery/torus.hpp"

namespace scenery {

using TimeTuple = std::vector<double>;

// S_n(y) = (2pi)^-d mu( Omega cap (Omega - P_1) cap ... cap (Omega - P_n) ),
// P_j = y_1 + ... + y_j. Exact: box intersections of the disjoint fragments.
double spatial_correlation(const Scenery& s, const PointerTuple& y);

// sigma_n(y) = sum over sign vectors e of S_n(e_1 y_1, ..., e_n y_n); d = 1.
double sigma_correlation(const Scenery& s, std::span<const double> y);

// Closed-form transform of S_n at the flattened index k = (k_1, ..., k_n),
// each k_j in Z^d:
//   S^_n(k) = (2pi)^-d prod_{j=0..n} f^(q_j),
//   q_0 = -k_1, q_j = k_j - k_{j+1}, q_n = k_n.
// For n = 0 this is S_0 = mu(Omega) / (2pi)^d.
std::complex<double> spatial_fourier(const Scenery& s, std::span<const int> k);

struct CorrelationEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
};

struct MonteCarloOptions {
  std::int64_t blocks = 100000;
  std::optional<double> gap;  // default: default_gap(law)
  std::uint64_t seed = 0;
  int segments = 8;  // fixed work split; results depend on (seed, segments) only
  int workers = 1;
};

// 2 / (slowest non-zero Fourier decay rate), the spacing between blocks.
double default_gap(const StepLaw& law);

// Block estimator of T_n(t): each block starts at a uniform point and
// records f(X_0) prod_j f(X_{t_1 + ... + t_j}); blocks are separated by gap.
CorrelationEstimate estimate_temporal(const StepLaw& law, const Scenery& s, const TimeTuple& t,
                                      const MonteCarloOptions& opt);

// Same estimator on a recorded trace sampled every dt. Times and gap are
// rounded to multiples of dt.
CorrelationEstimate estimate_temporal_from_trace(std::span<const double> trace, double dt,
                                                 const TimeTuple& t, double gap);

struct ExactTemporal {
  double value = 0.0;
  double truncation_bound = 0.0;
};

// T_n(t) from the transform identity, summing indices in {-K..K}^{|A| d} for
// each subset A of continuous steps. n <= 4.
ExactTemporal exact_temporal_fourier(const StepLaw& law, const Scenery& s, const TimeTuple& t, int K);

// T_n(t) by direct quadrature of S_n against the step densities; d = 1, n <= 2.
double exact_temporal_quadrature(const StepLaw& law, const Scenery& s, const TimeTuple& t,
                                 double tol = 1e-10);

// Transform-side building block shared with the inverse problem:
// sum over k in {-K..K}^{n d} of prod_i c_i(k_i) * conj(S^_n(k)), where
// coeff[i] lists c_i over {-K..K}^d in index_box order.
std::complex<double> weighted_fourier_sum(const Scenery& s, int n, int K,
                                          const std::vector<std::vector<std::complex<double>>>& coeff);

}  // namespace scenery
