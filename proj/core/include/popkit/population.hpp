#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "popkit/binomial.hpp"
#include "popkit/distribution.hpp"

namespace popkit {

/// Equal mass at 1/4, 1/2 and 3/4.
struct ThreeSpike {};
/// Normal(mean, sd) conditioned on [0,1].
struct TruncatedNormal {
  double mean = 0.5;
  double sd = 0.15;
};
struct UniformPopulation {};
struct PointMass {
  double value = 0.5;
};
struct CustomPopulation {
  PointMassDistribution distribution;
};

using PopulationKind = std::variant<ThreeSpike, TruncatedNormal, UniformPopulation, PointMass, CustomPopulation>;

struct PopulationSpec {
  PopulationKind kind;
  std::size_t n = 1;
  Count t = 1;
  std::uint64_t seed = 0;

  void validate() const;
  /// Short kind label used in reports, e.g. "truncated_normal(0.5;0.15)".
  std::string label() const;
};

struct PopulationSample {
  std::vector<double> p;
  BinomialDataset data;
};

/// Draws p_i i.i.d. from the population, then X_i ~ Binomial(t, p_i).
/// Deterministic given spec.seed.
PopulationSample sample_population(const PopulationSpec& spec);

/// Mass 1/n at each X_i / t on the grid m = t. Requires common trials.
GriddedDistribution empirical_distribution(const BinomialDataset& data);

/// Mass 1/n at each p_i, with equal values merged.
PointMassDistribution histogram_of(std::span<const double> p);

/// Two distinct distributions on [0,1] whose first t moments coincide:
/// Gauss-Legendre rules of orders ceil((t+1)/2) and one more.
std::pair<PointMassDistribution, PointMassDistribution> matched_moment_pair(std::size_t t);

/// P(X = k), k = 0..t, for X ~ Binomial(t, p) with p drawn from `dist`.
std::vector<double> mixture_binomial_pmf(const PointMassDistribution& dist, Count t);

}  // namespace popkit
