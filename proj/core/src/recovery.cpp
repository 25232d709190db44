#include "popkit/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "moment_program.hpp"
#include "popkit/error.hpp"

namespace popkit {

RecoveryConfig RecoveryConfig::defaults(std::size_t k_max) {
  RecoveryConfig c;
  c.k_max = k_max;
  c.grid_size = std::max<std::size_t>(100, 10 * k_max);
  return c;
}

void RecoveryConfig::validate() const {
  if (k_max == 0) throw ValidationError("RecoveryConfig: k_max must be positive");
  if (grid_size == 0) throw ValidationError("RecoveryConfig: grid_size must be positive");
  if (grid_size < 10 * k_max) {
    throw ValidationError("RecoveryConfig: grid_size " + std::to_string(grid_size) + " is below 10 * k_max = " +
                          std::to_string(10 * k_max));
  }
  if (!(weight_floor > 0.0)) throw ValidationError("RecoveryConfig: weight_floor must be positive");
  if (!(lp_tolerance > 0.0)) throw ValidationError("RecoveryConfig: lp_tolerance must be positive");
  if (!(qp_tolerance > 0.0)) throw ValidationError("RecoveryConfig: qp_tolerance must be positive");
  if (qp_max_iters == 0) throw ValidationError("RecoveryConfig: qp_max_iters must be positive");
}

std::vector<double> build_weights(const MomentEstimates& est, const RecoveryConfig& config) {
  if (est.k_max < config.k_max || est.sigma_hat.size() < config.k_max) {
    throw ValidationError("build_weights: estimates cover " + std::to_string(est.k_max) +
                          " moments but k_max is " + std::to_string(config.k_max));
  }
  std::vector<double> w(config.k_max, 1.0);
  if (config.weight_mode == WeightMode::Uniform) return w;
  for (std::size_t k = 0; k < config.k_max; ++k) w[k] = 1.0 / std::max(est.sigma_hat[k], config.weight_floor);
  const double smallest = *std::min_element(w.begin(), w.end());
  for (double& v : w) v /= smallest;
  return w;
}

double moment_discrepancy(std::span<const double> fitted, std::span<const double> target,
                          std::span<const double> weights, Objective objective) {
  if (fitted.size() != target.size() || weights.size() != target.size()) {
    throw ValidationError("moment_discrepancy: length mismatch");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    const double d = fitted[k] - target[k];
    total += objective == Objective::L1 ? weights[k] * std::abs(d) : weights[k] * weights[k] * d * d;
  }
  return total;
}

RecoveryResult recover_from_moments(std::span<const double> moments, std::span<const double> weights,
                                    const RecoveryConfig& config) {
  config.validate();
  if (moments.size() < config.k_max || weights.size() < config.k_max) {
    throw ValidationError("recover: need " + std::to_string(config.k_max) + " moments and weights");
  }

  detail::MomentProgram program;
  program.rows = config.k_max;
  program.cells = config.grid_size + 1;
  program.features.resize(program.rows * program.cells);
  for (std::size_t c = 0; c < program.cells; ++c) {
    const double x = static_cast<double>(c) / static_cast<double>(config.grid_size);
    double power = 1.0;
    for (std::size_t r = 0; r < program.rows; ++r) {
      power *= x;
      program.features[r * program.cells + c] = power;
    }
  }
  for (std::size_t k = 0; k < config.k_max; ++k) {
    program.targets.push_back(std::clamp(moments[k], 0.0, 1.0));
    if (!(weights[k] > 0.0)) throw ValidationError("recover: weights must be positive");
    program.weights.push_back(weights[k]);
  }

  const detail::ProgramSolution sol =
      config.objective == Objective::L1
          ? detail::solve_l1(program, config.lp_tolerance)
          : detail::solve_l2(program, config.qp_tolerance, config.qp_max_iters);
  return RecoveryResult{GriddedDistribution(config.grid_size, sol.masses), sol.objective, sol.iterations};
}

RecoveryResult recover_detailed(const MomentEstimates& est, const RecoveryConfig& config) {
  config.validate();
  const std::vector<double> weights = build_weights(est, config);
  return recover_from_moments(std::span(est.beta).first(config.k_max), weights, config);
}

}  // namespace popkit
