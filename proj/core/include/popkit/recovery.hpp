#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "popkit/distribution.hpp"
#include "popkit/moments.hpp"

namespace popkit {

enum class Objective { L1, L2 };
enum class WeightMode { Uniform, InverseStd };

/// Settings for moment-matching recovery.
struct RecoveryConfig {
  std::size_t k_max = 1;
  std::size_t grid_size = 100;
  Objective objective = Objective::L2;
  WeightMode weight_mode = WeightMode::InverseStd;
  double weight_floor = 1e-6;
  double lp_tolerance = 1e-9;
  double qp_tolerance = 1e-10;
  std::size_t qp_max_iters = 200'000;

  /// Grid m = max(100, 10 k_max) and the default tolerances.
  static RecoveryConfig defaults(std::size_t k_max);

  /// Throws ValidationError; requires grid_size >= 10 k_max.
  void validate() const;
};

/// Per-moment weights. Uniform gives all ones; InverseStd gives
/// 1 / max(sigma_hat_k, floor) rescaled so the smallest weight is 1.
std::vector<double> build_weights(const MomentEstimates& est, const RecoveryConfig& config);

/// Weighted discrepancy between `fitted` and `target` moments:
/// sum w_k |d_k| for L1, sum w_k^2 d_k^2 for L2.
double moment_discrepancy(std::span<const double> fitted, std::span<const double> target,
                          std::span<const double> weights, Objective objective);

struct RecoveryResult {
  GriddedDistribution distribution;
  double objective = 0.0;
  std::size_t iterations = 0;
};

/// Distribution on the config grid whose first k_max moments best match
/// `est.beta` under the configured objective. Throws SolverError if the
/// quadratic program does not converge within qp_max_iters.
RecoveryResult recover_detailed(const MomentEstimates& est, const RecoveryConfig& config);

inline GriddedDistribution recover(const MomentEstimates& est, const RecoveryConfig& config) {
  return recover_detailed(est, config).distribution;
}

/// Recovery from a bare moment vector with explicit weights.
RecoveryResult recover_from_moments(std::span<const double> moments, std::span<const double> weights,
                                    const RecoveryConfig& config);

}  // namespace popkit
