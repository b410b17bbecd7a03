#pragma once

#include <span>
#include <vector>

#include "scenery/step_law.hpp"

namespace scenery {

// Gaver-Stehfest weights V_1..V_N (N even).
std::vector<double> stehfest_weights(int terms);

// Laplace transform at p > 0 of the piecewise-linear interpolant of
// (times, values), integrated exactly, plus the constant tail
// values.back() e^{-p t_max} / p.
double laplace_of_samples(std::span<const double> times, std::span<const double> values, double p);

struct SigmaPoint {
  double y = 0.0;
  double value = 0.0;
  double error = 0.0;  // |estimate(N) - estimate(N - 2)|
};

// sigma_1 on y > 0 from samples of T_1 for a driftless Brownian law in one
// dimension. With sigma2 the diffusion rate,
//   L{sigma_1}(s) = s sigma2 L{T_1}(sigma2 s^2 / 2),
// inverted by Gaver-Stehfest with the given number of terms. s0 = S_0 is
// used as T_1(0) when the samples start after 0.
std::vector<SigmaPoint> laplace_invert_sigma1(const StepLaw& law, double s0, std::span<const double> times,
                                              std::span<const double> values, std::span<const double> ys,
                                              int terms = 14);

}  // namespace scenery
