#include "popkit/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "popkit/error.hpp"
#include "popkit/moments.hpp"
#include "popkit/rng.hpp"

namespace popkit {

void BootstrapConfig::validate() const {
  if (replicates == 0) throw ValidationError("BootstrapConfig: replicates must be positive");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ValidationError("BootstrapConfig: fraction must lie in (0, 1]");
}

namespace {

// Positions of a uniformly random subset of size k, ascending.
std::vector<std::size_t> subsample_positions(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> positions(n);
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  Engine engine(seed);
  // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
  for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(positions[i], positions[pick(engine)]);
  }
  positions.resize(k);
  std::sort(positions.begin(), positions.end());
  return positions;
}

}  // namespace

BootstrapResult bootstrap_recover_with_seeds(const BinomialDataset& data, const RecoveryConfig& config,
                                             double fraction, std::span<const std::uint64_t> seeds) {
  BootstrapConfig{seeds.size(), fraction, 0}.validate();
  config.validate();
  const std::size_t n = data.size();
  const auto size = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  if (size == 0) throw ValidationError("bootstrap: subsample would be empty");

  std::vector<double> sum(config.grid_size + 1, 0.0);
  std::size_t used = 0;
  std::vector<std::string> warnings;
  std::string last_error;
  for (std::size_t r = 0; r < seeds.size(); ++r) {
    try {
      const auto positions = subsample_positions(n, std::min(size, n), seeds[r]);
      const BinomialDataset sub = data.subset(positions);
      const GriddedDistribution dist = recover(estimate_moments(sub, config.k_max), config);
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += dist.masses()[i];
      ++used;
    } catch (const Error& e) {
      last_error = e.what();
      warnings.push_back("bootstrap replicate " + std::to_string(r) + " dropped: " + last_error);
    }
  }
  if (used == 0) {
    throw SolverError("bootstrap: every replicate failed; last error: " + last_error, {}, 0.0);
  }
  for (double& q : sum) q /= static_cast<double>(used);
  return BootstrapResult{GriddedDistribution(config.grid_size, std::move(sum)), used, std::move(warnings)};
}

BootstrapResult bootstrap_recover_detailed(const BinomialDataset& data, const RecoveryConfig& config,
                                           const BootstrapConfig& boot) {
  boot.validate();
  std::vector<std::uint64_t> seeds(boot.replicates);
  for (std::size_t r = 0; r < boot.replicates; ++r) seeds[r] = derive_seed(boot.seed, r);
  return bootstrap_recover_with_seeds(data, config, boot.fraction, seeds);
}

}  // namespace popkit
