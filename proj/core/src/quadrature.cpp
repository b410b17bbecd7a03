#include <cmath>

#include "integrate.hpp"
#include "scenery/step_law.hpp"

namespace scenery {

std::complex<double> quadrature_gamma_hat(const StepLaw& law, double t, std::span<const int> k, double tol) {
  if (static_cast<int>(k.size()) != law.dim()) throw std::invalid_argument("quadrature_gamma_hat: dimension mismatch");
  if (law.dim() > 3) throw std::invalid_argument("quadrature_gamma_hat: dimension above 3");
  std::vector<GaussianTerm> terms = continuous_terms(law, t, tol * 1e-3);

  std::complex<double> total = 0.0;
  for (const GaussianTerm& g : terms) {
    // Each term is a product of wrapped normals, so the transform factorizes.
    std::complex<double> term = g.weight;
    for (std::size_t i = 0; i < k.size(); ++i) {
      const double m = g.mean[i], v = g.var[i];
      const double kk = k[i];
      const double c = wrap_angle(m);
      auto density = [&](double y) { return wrapped_normal_density(y, m, v); };
      double re = detail::integrate_pieces([&](double y) { return std::cos(kk * y) * density(y); },
                                           c - pi, c + pi, {c}, tol);
      double im = detail::integrate_pieces([&](double y) { return -std::sin(kk * y) * density(y); },
                                           c - pi, c + pi, {c}, tol);
      term *= std::complex<double>(re, im);
    }
    total += term;
  }
  return total;
}

}  // namespace scenery
