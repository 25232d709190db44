#pragma once

#include <cstddef>
#include <vector>

namespace popkit {

struct QuadratureRule {
  std::vector<double> nodes;    ///< ascending, in (0, 1)
  std::vector<double> weights;  ///< positive, summing to 1
};

/// Gauss-Legendre rule of the given order on [0,1]; exact for polynomials
/// of degree up to 2 * order - 1. Nodes are found by Newton's method on the
/// Legendre recurrence from Chebyshev-like starting points.
QuadratureRule gauss_legendre(std::size_t order);

}  // namespace popkit
