#include <gtest/gtest.h>

#include "popkit/bootstrap.hpp"
#include "popkit/error.hpp"
#include "popkit/moments.hpp"
#include "popkit/population.hpp"
#include "popkit/rng.hpp"
#include "popkit/transport.hpp"

namespace popkit {
namespace {

TEST(Bootstrap, SingleFullReplicateEqualsDirectRecovery) {
  const auto sample = sample_population({ThreeSpike{}, 3000, 6, 8});
  const auto config = RecoveryConfig::defaults(6);
  const auto boot = bootstrap_recover_detailed(sample.data, config, {1, 1.0, 123});
  EXPECT_EQ(boot.replicates_used, 1u);
  EXPECT_TRUE(boot.warnings.empty());
  EXPECT_EQ(boot.distribution, recover(estimate_moments(sample.data, 6), config));
}

TEST(Bootstrap, EqualSeedsReproduceOneReplicate) {
  const auto sample = sample_population({UniformPopulation{}, 2000, 5, 9});
  const auto config = RecoveryConfig::defaults(5);
  const std::vector<std::uint64_t> twice{55, 55}, once{55};
  const auto pair = bootstrap_recover_with_seeds(sample.data, config, 0.5, twice);
  const auto single = bootstrap_recover_with_seeds(sample.data, config, 0.5, once);
  EXPECT_EQ(pair.distribution, single.distribution);
}

TEST(Bootstrap, ReplicatesFollowDerivedSeeds) {
  const auto sample = sample_population({UniformPopulation{}, 1000, 4, 10});
  const auto config = RecoveryConfig::defaults(4);
  const std::vector<std::uint64_t> seeds{derive_seed(3, 0), derive_seed(3, 1), derive_seed(3, 2)};
  EXPECT_EQ(bootstrap_recover(sample.data, config, {3, 0.5, 3}),
            bootstrap_recover_with_seeds(sample.data, config, 0.5, seeds).distribution);
}

TEST(Bootstrap, OutputIsAValidDistribution) {
  const auto sample = sample_population({TruncatedNormal{}, 1500, 8, 11});
  const auto dist = bootstrap_recover(sample.data, RecoveryConfig::defaults(8), {7, 0.3, 5});
  double total = 0.0;
  for (double q : dist.masses()) {
    EXPECT_GE(q, 0.0);
    total += q;
  }
  EXPECT_NEAR(total, 1.0, kMassTolerance);
}

TEST(Bootstrap, PointMassAveragingDoesNotHurt) {
  const auto truth = GriddedDistribution::point_mass(100, 50);
  const auto config = RecoveryConfig::defaults(8);
  for (std::uint64_t master = 0; master < 20; ++master) {
    const auto sample = sample_population({PointMass{0.5}, 50000, 8, derive_seed(1000, master)});
    const auto single = recover(estimate_moments(sample.data, 8), config);
    const auto averaged = bootstrap_recover(sample.data, config, {20, 0.5, master});
    EXPECT_LE(emd_1d(averaged, truth), emd_1d(single, truth) + 0.01) << "master seed " << master;
  }
}

TEST(Bootstrap, FailingReplicatesAreDroppedWithWarnings) {
  std::vector<BinomialObservation> records(10, BinomialObservation{1, 1});
  records.push_back({2, 3});
  const BinomialDataset data(records);
  auto config = RecoveryConfig::defaults(3);
  const auto result = bootstrap_recover_detailed(data, config, {30, 0.1, 4});
  EXPECT_GT(result.replicates_used, 0u);
  EXPECT_FALSE(result.warnings.empty());
  EXPECT_EQ(result.replicates_used + result.warnings.size(), 30u);
}

TEST(Bootstrap, AllReplicatesFailingIsAnError) {
  const BinomialDataset data(std::vector<BinomialObservation>(10, BinomialObservation{1, 1}));
  EXPECT_THROW(bootstrap_recover(data, RecoveryConfig::defaults(3), {4, 0.5, 0}), Error);
}

TEST(BootstrapConfig, Validation) {
  EXPECT_THROW((BootstrapConfig{0, 0.5, 0}.validate()), ValidationError);
  EXPECT_THROW((BootstrapConfig{1, 0.0, 0}.validate()), ValidationError);
  EXPECT_THROW((BootstrapConfig{1, 1.5, 0}.validate()), ValidationError);
  EXPECT_NO_THROW((BootstrapConfig{1, 1.0, 0}.validate()));
}

}  // namespace
}  // namespace popkit
