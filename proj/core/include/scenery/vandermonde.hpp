#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace scenery {

using Complex = std::complex<double>;

// Distinct non-zero generators. The original order is kept; order() lists
// positions by non-increasing modulus.
class GeneratorSet {
public:
  explicit GeneratorSet(std::vector<Complex> z);

  std::size_t size() const { return z_.size(); }
  const std::vector<Complex>& values() const { return z_; }
  const std::vector<std::size_t>& order() const { return order_; }
  double min_pairwise_distance() const { return min_distance_; }
  double min_modulus() const { return min_modulus_; }

private:
  std::vector<Complex> z_;
  std::vector<std::size_t> order_;
  double min_distance_ = 0.0;
  double min_modulus_ = 0.0;
};

// Dense row-major complex matrix for the public interface.
struct ComplexMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<Complex> data;

  ComplexMatrix() = default;
  ComplexMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}
  Complex& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b);

struct LeastSquaresResult {
  std::vector<Complex> x;
  double residual_norm = 0.0;
  double condition = 0.0;  // after column equilibration
  bool trusted = false;    // condition <= trust threshold
};

// min ||A x - b|| after scaling each column by its largest modulus; SVD solve.
LeastSquaresResult solve_least_squares(const ComplexMatrix& a, std::span<const Complex> b,
                                       double trust_condition = 1e12);

// V_{pj} = z_j^p for p = 1..rows.
ComplexMatrix vandermonde_matrix(const GeneratorSet& z, std::size_t rows);

// Solves sum_j z_j^p x_j = b_p, p = 1..M (M = b.size() >= size of z).
LeastSquaresResult vandermonde_solve(const GeneratorSet& z, std::span<const Complex> b,
                                     double trust_condition = 1e12);

// Coefficients e_0..e_l of prod_j (1 + z_j X), by the one-pass recurrence.
std::vector<Complex> elementary_symmetric(std::span<const Complex> z);

// Entry (i, p) of the inverse of the square matrix V_{pj} = z_j^p
// (p = 1..l; 0-based i indexes generators and p powers):
//   (-1)^(l-1-p) e_{l-1-p}(z without z_i) / (z_i prod_{k != i} (z_i - z_k)).
// Limited to l <= 8.
Complex vandermonde_inverse_entry(const GeneratorSet& z, std::size_t i, std::size_t p);
ComplexMatrix vandermonde_inverse(const GeneratorSet& z);

// r_M = sum_j z_j^M x_j for M = 1..max_power.
std::vector<Complex> truncation_residuals(const GeneratorSet& z, std::span<const Complex> x,
                                          std::size_t max_power);

struct Recurrence {
  std::uint64_t m = 0;
  bool constructive = false;  // found by the halving construction, not the scan
  double max_angle = 0.0;     // max_s |arg(omega_s^m)| / pi
};

// Bound (ceil(1/eps) + 1)^(l log2(1/eps)) on the constructive power.
double recurrence_bound(double eps, std::size_t l);

// Smallest m in [1, limit] with |arg(omega_s^m)| <= eps pi for all s; 0 if none.
std::uint64_t recurrence_scan(std::span<const Complex> omega, double eps, std::uint64_t limit);

// Integer m >= 1 with |arg(omega_s^m)| <= eps pi for all s, for unit-modulus
// omega_s. The halving construction is tried first; a bounded scan decides
// whenever the construction leaves double precision or exceeds its bound.
Recurrence recurrent_rotation(std::span<const Complex> omega, double eps,
                              std::uint64_t scan_limit = 10'000'000);

}  // namespace scenery
