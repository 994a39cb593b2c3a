#pragma once

#include <functional>
#include <span>
#include <vector>

#include "grouprl/spectral.hpp"

namespace grouprl {

/// Brute-force references used by the verification suites and tests.  These
/// deliberately avoid the convolution machinery: success probabilities and
/// posteriors come from explicit sums over all intermediate-state sequences.
namespace oracle {

/// P(v_L = yL) by enumerating all d^{L-1} intermediate trajectories.
double enumerate_success(std::span<const StepLaw> laws, std::span<const Elem> context,
                         Elem y0, Elem yL, const GroupTable& table);

struct EnumeratedPosteriors {
  double p_success = 0.0;
  std::vector<double> rho1;
  std::vector<double> rho2;
};

/// Bayes-rule posteriors by full enumeration.
EnumeratedPosteriors enumerate_posteriors(std::span<const StepLaw> laws,
                                          std::span<const Elem> context, Elem y0, Elem yL,
                                          const GroupTable& table);

/// Central finite difference (f(x+h) - f(x-h)) / 2h.
double central_difference(const std::function<double(double)>& f, double x, double h);

}  // namespace oracle

}  // namespace grouprl
