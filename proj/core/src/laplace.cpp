#include "scenery/laplace.hpp"

#include <cmath>
#include <stdexcept>

namespace scenery {

std::vector<double> stehfest_weights(int terms) {
  if (terms < 2 || terms % 2 != 0 || terms > 30)
    throw std::invalid_argument("stehfest_weights: term count must be even and in [2, 30]");
  const int half = terms / 2;
  auto fact = [](int n) { return std::tgamma(n + 1.0); };
  std::vector<double> v(static_cast<std::size_t>(terms));
  for (int j = 1; j <= terms; ++j) {
    double s = 0.0;
    for (int k = (j + 1) / 2; k <= std::min(j, half); ++k)
      s += std::pow(k, half) * fact(2 * k) /
           (fact(half - k) * fact(k) * fact(k - 1) * fact(j - k) * fact(2 * k - j));
    v[static_cast<std::size_t>(j - 1)] = ((j + half) % 2 == 0 ? 1.0 : -1.0) * s;
  }
  return v;
}

double laplace_of_samples(std::span<const double> times, std::span<const double> values, double p) {
  if (times.size() != values.size() || times.size() < 2)
    throw std::invalid_argument("laplace_of_samples: need at least two matching samples");
  if (!(p > 0.0)) throw std::invalid_argument("laplace_of_samples: p must be positive");
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double a = times[i], b = times[i + 1], h = b - a;
    if (!(h > 0.0)) throw std::invalid_argument("laplace_of_samples: times must increase");
    const double ea = std::exp(-p * a), eb = std::exp(-p * b);
    const double i0 = (ea - eb) / p;                        // int e^{-pt}
    const double i1 = (ea - eb * (1.0 + p * h)) / (p * p);  // int (t - a) e^{-pt}
    total += values[i] * i0 + (values[i + 1] - values[i]) / h * i1;
  }
  total += values.back() * std::exp(-p * times.back()) / p;
  return total;
}

std::vector<SigmaPoint> laplace_invert_sigma1(const StepLaw& law, double s0, std::span<const double> times,
                                              std::span<const double> values, std::span<const double> ys,
                                              int terms) {
  if (law.dim() != 1 || !law.brownian_part() || law.jump_part())
    throw std::invalid_argument("laplace_invert_sigma1: needs a one-dimensional Brownian law without jumps");
  if (law.brownian_part()->drift[0] != 0.0)
    throw std::invalid_argument("laplace_invert_sigma1: drift must vanish");
  if (terms < 4) throw std::invalid_argument("laplace_invert_sigma1: at least four terms");
  const double sigma2 = law.brownian_part()->sigma2[0];

  std::vector<double> t(times.begin(), times.end()), v(values.begin(), values.end());
  if (t.empty()) throw std::invalid_argument("laplace_invert_sigma1: no samples");
  if (t.front() > 0.0) {
    t.insert(t.begin(), 0.0);
    v.insert(v.begin(), s0);
  }

  auto transform = [&](double s) { return s * sigma2 * laplace_of_samples(t, v, sigma2 * s * s / 2.0); };
  auto invert = [&](double y, int n) {
    std::vector<double> w = stehfest_weights(n);
    const double c = std::log(2.0) / y;
    double acc = 0.0;
    for (int j = 1; j <= n; ++j) acc += w[static_cast<std::size_t>(j - 1)] * transform(j * c);
    return c * acc;
  };

  std::vector<SigmaPoint> out;
  for (double y : ys) {
    if (!(y > 0.0)) throw std::invalid_argument("laplace_invert_sigma1: y must be positive");
    SigmaPoint pt;
    pt.y = y;
    pt.value = invert(y, terms);
    pt.error = std::abs(pt.value - invert(y, terms - 2));
    out.push_back(pt);
  }
  return out;
}

}  // namespace scenery
