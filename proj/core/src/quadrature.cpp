#include "popkit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "popkit/error.hpp"

namespace popkit {

QuadratureRule gauss_legendre(std::size_t order) {
  if (order == 0) throw ValidationError("gauss_legendre: order must be positive");
  if (order > 64) throw ValidationError("gauss_legendre: order above 64 is not supported");
  const auto n = static_cast<double>(order);
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (std::size_t i = 0; i < order; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    double derivative = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // P_order(x) and P_order'(x) by the three-term recurrence.
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= order; ++k) {
        const auto kd = static_cast<double>(k);
        const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) p0 = 1.0;
      derivative = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / derivative;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t k = 2; k <= order; ++k) {
      const auto kd = static_cast<double>(k);
      const double p2 = ((2.0 * kd - 1.0) * x * p1 - (kd - 1.0) * p0) / kd;
      p0 = p1;
      p1 = p2;
    }
    derivative = n * (x * p1 - p0) / (x * x - 1.0);
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.weights[i] = 1.0 / ((1.0 - x * x) * derivative * derivative);
  }
  // Nodes were generated in descending x, i.e. ascending 1 - x.
  return rule;
}

}  // namespace popkit
