#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace scenery::detail {

struct Panel {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

template <class F>
Panel gk_panel(F& f, double a, double b) {
  Panel p;
  p.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &p.error, &p.l1);
  return p;
}

// Bisects until the panel error is below its share of an absolute target
// or at the rounding floor of the panel.
template <class F>
double refine(F& f, double a, double b, const Panel& p, double target_per_length, unsigned depth) {
  const double floor = 100.0 * std::numeric_limits<double>::epsilon() * p.l1;
  if (depth == 0 || p.error <= std::max(target_per_length * (b - a), floor)) return p.value;
  const double m = 0.5 * (a + b);
  const Panel l = gk_panel(f, a, m), r = gk_panel(f, m, b);
  return refine(f, a, m, l, target_per_length, depth - 1) + refine(f, m, b, r, target_per_length, depth - 1);
}

// Adaptive Gauss-Kronrod on [a, b], split at the given interior breakpoints
// (kinks of f); tol is relative to the L1 norm of f over the whole range.
template <class F>
double integrate_pieces(F&& f, double a, double b, std::vector<double> breaks, double tol, unsigned max_depth = 15) {
  if (!(b > a)) return 0.0;
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  std::vector<std::pair<double, double>> pieces;
  double prev = a;
  for (double x : breaks) {
    if (x <= prev) continue;
    if (x > b) break;
    pieces.emplace_back(prev, x);
    prev = x;
  }
  std::vector<Panel> first;
  double l1 = 0.0;
  for (const auto& [lo, hi] : pieces) {
    first.push_back(gk_panel(f, lo, hi));
    l1 += first.back().l1;
  }
  const double target = tol * l1 / (b - a);
  double total = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i)
    total += refine(f, pieces[i].first, pieces[i].second, first[i], target, max_depth);
  return total;
}

template <class F>
double integrate(F&& f, double a, double b, double tol, unsigned max_depth = 15) {
  return integrate_pieces(f, a, b, {}, tol, max_depth);
}

}  // namespace scenery::detail
