#pragma once

#include <cstddef>

#include "popkit/distribution.hpp"

namespace popkit {

enum class GroundMetric { L1, L2 };

/// Largest atom count per side accepted by `emd_transport`.
inline constexpr std::size_t kMaxTransportAtoms = 500;

/// Earth mover's distance between one-dimensional distributions, computed
/// exactly as the integral of |CDF_p - CDF_q| over the merged atom locations.
double emd_1d(const PointMassDistribution& p, const PointMassDistribution& q);

double emd_1d(const GriddedDistribution& p, const GriddedDistribution& q);

/// Optimal transport cost between distributions on [0,1]^d, solved as a
/// linear program over couplings. Throws ResourceError when either side
/// has more than kMaxTransportAtoms atoms.
double emd_transport(const PointMassDistribution& p, const PointMassDistribution& q,
                     GroundMetric metric = GroundMetric::L2);

}  // namespace popkit
