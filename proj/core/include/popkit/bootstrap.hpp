#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "popkit/binomial.hpp"
#include "popkit/distribution.hpp"
#include "popkit/recovery.hpp"

namespace popkit {

struct BootstrapConfig {
  std::size_t replicates = 20;
  double fraction = 0.5;  ///< subsample size is ceil(fraction * n), drawn without replacement
  std::uint64_t seed = 0;

  void validate() const;
};

struct BootstrapResult {
  GriddedDistribution distribution;
  std::size_t replicates_used = 0;
  std::vector<std::string> warnings;  ///< one per dropped replicate
};

/// Averages the mass vectors recovered from `boot.replicates` random
/// subsamples. Replicate r uses seed derive_seed(boot.seed, r).
BootstrapResult bootstrap_recover_detailed(const BinomialDataset& data, const RecoveryConfig& config,
                                           const BootstrapConfig& boot);

inline GriddedDistribution bootstrap_recover(const BinomialDataset& data, const RecoveryConfig& config,
                                             const BootstrapConfig& boot) {
  return bootstrap_recover_detailed(data, config, boot).distribution;
}

/// Same procedure with one explicit seed per replicate. Subsample rows are
/// kept in their original order, so fraction 1 reproduces the full data.
BootstrapResult bootstrap_recover_with_seeds(const BinomialDataset& data, const RecoveryConfig& config,
                                             double fraction, std::span<const std::uint64_t> seeds);

}  // namespace popkit
