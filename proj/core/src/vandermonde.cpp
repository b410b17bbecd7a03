#include "scenery/vandermonde.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

#include "scenery/torus.hpp"

namespace scenery {

GeneratorSet::GeneratorSet(std::vector<Complex> z) : z_(std::move(z)) {
  if (z_.empty()) throw std::invalid_argument("GeneratorSet: empty");
  min_modulus_ = std::numeric_limits<double>::infinity();
  min_distance_ = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < z_.size(); ++a) {
    if (!std::isfinite(z_[a].real()) || !std::isfinite(z_[a].imag()))
      throw std::invalid_argument("GeneratorSet: non-finite generator");
    min_modulus_ = std::min(min_modulus_, std::abs(z_[a]));
    for (std::size_t b = a + 1; b < z_.size(); ++b) min_distance_ = std::min(min_distance_, std::abs(z_[a] - z_[b]));
  }
  if (min_modulus_ == 0.0) throw std::invalid_argument("GeneratorSet: zero generator");
  if (min_distance_ == 0.0) throw std::invalid_argument("GeneratorSet: duplicate generators");
  order_.resize(z_.size());
  std::iota(order_.begin(), order_.end(), 0);
  std::stable_sort(order_.begin(), order_.end(),
                   [this](std::size_t a, std::size_t b) { return std::abs(z_[a]) > std::abs(z_[b]); });
}

ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("multiply: shape mismatch");
  ComplexMatrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k)
      for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += a(i, k) * b(k, j);
  return c;
}

LeastSquaresResult solve_least_squares(const ComplexMatrix& a, std::span<const Complex> b, double trust_condition) {
  if (a.rows != b.size()) throw std::invalid_argument("solve_least_squares: right-hand side length mismatch");
  if (a.rows < a.cols) throw std::invalid_argument("solve_least_squares: fewer equations than unknowns");
  Eigen::MatrixXcd m(a.rows, a.cols);
  Eigen::VectorXcd rhs(a.rows);
  for (std::size_t r = 0; r < a.rows; ++r) {
    rhs(static_cast<Eigen::Index>(r)) = b[r];
    for (std::size_t c = 0; c < a.cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a(r, c);
  }
  Eigen::VectorXd scale(a.cols);
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    double s = m.col(c).cwiseAbs().maxCoeff();
    if (s == 0.0) throw std::invalid_argument("solve_least_squares: zero column");
    scale(c) = s;
    m.col(c) /= s;
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  LeastSquaresResult out;
  out.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  out.trusted = out.condition <= trust_condition;
  Eigen::VectorXcd y = svd.solve(rhs);
  out.residual_norm = (m * y - rhs).norm();
  out.x.resize(a.cols);
  for (std::size_t c = 0; c < a.cols; ++c) out.x[c] = y(static_cast<Eigen::Index>(c)) / scale(static_cast<Eigen::Index>(c));
  return out;
}

ComplexMatrix vandermonde_matrix(const GeneratorSet& z, std::size_t rows) {
  ComplexMatrix v(rows, z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    Complex p = 1.0;
    for (std::size_t r = 0; r < rows; ++r) {
      p *= z.values()[j];
      v(r, j) = p;
    }
  }
  return v;
}

LeastSquaresResult vandermonde_solve(const GeneratorSet& z, std::span<const Complex> b, double trust_condition) {
  if (b.size() < z.size())
    throw std::invalid_argument("vandermonde_solve: need at least " + std::to_string(z.size()) + " moments");
  return solve_least_squares(vandermonde_matrix(z, b.size()), b, trust_condition);
}

std::vector<Complex> elementary_symmetric(std::span<const Complex> z) {
  std::vector<Complex> e(z.size() + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t k = 0; k < z.size(); ++k)
    for (std::size_t r = k + 1; r >= 1; --r) e[r] += z[k] * e[r - 1];
  return e;
}

Complex vandermonde_inverse_entry(const GeneratorSet& z, std::size_t i, std::size_t p) {
  const std::size_t l = z.size();
  if (l > 8) throw std::invalid_argument("vandermonde_inverse_entry: explicit inverse limited to 8 generators");
  if (i >= l || p >= l) throw std::out_of_range("vandermonde_inverse_entry: index out of range");
  const auto& v = z.values();
  std::vector<Complex> others;
  Complex denom = v[i];
  for (std::size_t k = 0; k < l; ++k) {
    if (k == i) continue;
    others.push_back(v[k]);
    denom *= v[i] - v[k];
  }
  std::vector<Complex> e = elementary_symmetric(others);
  const std::size_t r = l - 1 - p;
  const double sign = (r % 2 == 0) ? 1.0 : -1.0;
  return sign * e[r] / denom;
}

ComplexMatrix vandermonde_inverse(const GeneratorSet& z) {
  ComplexMatrix w(z.size(), z.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t p = 0; p < z.size(); ++p) w(i, p) = vandermonde_inverse_entry(z, i, p);
  return w;
}

std::vector<Complex> truncation_residuals(const GeneratorSet& z, std::span<const Complex> x, std::size_t max_power) {
  if (x.size() != z.size()) throw std::invalid_argument("truncation_residuals: length mismatch");
  std::vector<Complex> r(max_power, 0.0);
  for (std::size_t j = 0; j < z.size(); ++j) {
    Complex p = 1.0;
    for (std::size_t m = 0; m < max_power; ++m) {
      p *= z.values()[j];
      r[m] += p * x[j];
    }
  }
  return r;
}

namespace {

// Reduce an angle measured in units of pi into (-1, 1].
double wrap_half_turns(long double a) {
  long double r = std::fmod(a, 2.0L);
  if (r > 1.0L) r -= 2.0L;
  if (r <= -1.0L) r += 2.0L;
  return static_cast<double>(r);
}

double max_angle(const std::vector<double>& a, std::uint64_t m) {
  double worst = 0.0;
  for (double as : a) worst = std::max(worst, std::abs(wrap_half_turns(static_cast<long double>(m) * as)));
  return worst;
}

constexpr double kExactPowerLimit = 9007199254740992.0;  // 2^53

// Halving construction for one rotation a (units of pi): each round finds
// a power j <= ceil(2/|a|) + 1 that halves the distance to 0.
std::optional<std::uint64_t> halve_single(double a, double eps) {
  std::uint64_t m = 1;
  double cur = wrap_half_turns(a);
  for (int round = 0; round < 200 && std::abs(cur) > eps; ++round) {
    int k = static_cast<int>(std::ceil(std::log2(std::abs(cur) / eps)));
    double target = eps * std::ldexp(1.0, k - 1);
    double jmax = std::ceil(2.0 / std::abs(cur)) + 1.0;
    if (jmax > 1e9) return std::nullopt;
    std::uint64_t found = 0;
    for (std::uint64_t j = 2; j <= static_cast<std::uint64_t>(jmax); ++j) {
      if (std::abs(wrap_half_turns(static_cast<long double>(j) * cur)) <= target) {
        found = j;
        break;
      }
    }
    if (found == 0) return std::nullopt;
    if (static_cast<double>(m) * static_cast<double>(found) > kExactPowerLimit) return std::nullopt;
    m *= found;
    cur = wrap_half_turns(static_cast<long double>(m) * a);
  }
  if (std::abs(cur) > eps) return std::nullopt;
  return m;
}

std::optional<std::uint64_t> construct(const std::vector<double>& a, std::size_t count, double eps) {
  if (count == 1) return halve_single(a[0], eps);
  // Make the first count-1 rotations much closer to 1, then fix the last one.
  double inner = eps / recurrence_bound(eps, 1);
  if (!(inner > 1e-12)) return std::nullopt;
  auto m1 = construct(a, count - 1, inner);
  if (!m1) return std::nullopt;
  auto m2 = halve_single(wrap_half_turns(static_cast<long double>(*m1) * a[count - 1]), eps);
  if (!m2) return std::nullopt;
  if (static_cast<double>(*m1) * static_cast<double>(*m2) > kExactPowerLimit) return std::nullopt;
  return *m1 * *m2;
}

}  // namespace

double recurrence_bound(double eps, std::size_t l) {
  return std::pow(std::ceil(1.0 / eps) + 1.0, static_cast<double>(l) * std::log2(1.0 / eps));
}

std::uint64_t recurrence_scan(std::span<const Complex> omega, double eps, std::uint64_t limit) {
  std::vector<double> a;
  for (const Complex& w : omega) a.push_back(std::arg(w) / pi);
  for (std::uint64_t m = 1; m <= limit; ++m)
    if (max_angle(a, m) <= eps) return m;
  return 0;
}

Recurrence recurrent_rotation(std::span<const Complex> omega, double eps, std::uint64_t scan_limit) {
  if (omega.empty()) throw std::invalid_argument("recurrent_rotation: no rotations");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("recurrent_rotation: eps must lie in (0, 1)");
  std::vector<double> a;
  for (const Complex& w : omega) {
    if (std::abs(std::abs(w) - 1.0) > 1e-12) throw std::invalid_argument("recurrent_rotation: generator off the unit circle");
    a.push_back(std::arg(w) / pi);
  }

  Recurrence out;
  if (auto m = construct(a, a.size(), eps)) {
    double worst = max_angle(a, *m);
    if (worst <= eps && static_cast<double>(*m) <= recurrence_bound(eps, a.size())) {
      out.m = *m;
      out.constructive = true;
      out.max_angle = worst;
      return out;
    }
  }
  std::uint64_t m = recurrence_scan(omega, eps, scan_limit);
  if (m == 0) throw std::runtime_error("recurrent_rotation: scan budget exhausted");
  out.m = m;
  out.max_angle = max_angle(a, m);
  return out;
}

}  // namespace scenery
