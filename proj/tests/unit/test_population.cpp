#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "popkit/distribution.hpp"
#include "popkit/error.hpp"
#include "popkit/population.hpp"
#include "popkit/quadrature.hpp"
#include "popkit/rng.hpp"
#include "popkit/sweep.hpp"
#include "popkit/transport.hpp"
#include "test_support.hpp"

namespace popkit {
namespace {

TEST(SamplePopulation, PointMassAtOne) {
  const auto s = sample_population({PointMass{1.0}, 50, 7, 1});
  for (double p : s.p) EXPECT_EQ(p, 1.0);
  for (const auto& r : s.data.records()) EXPECT_EQ(r.successes, 7u);
}

TEST(SamplePopulation, PointMassHalfMeanSuccessRate) {
  const auto s = sample_population({PointMass{0.5}, 100000, 10, 2});
  double total = 0.0;
  for (const auto& r : s.data.records()) total += static_cast<double>(r.successes);
  const double rate = total / (100000.0 * 10.0);
  EXPECT_GE(rate, 0.495);
  EXPECT_LE(rate, 0.505);
}

TEST(SamplePopulation, ThreeSpikeFrequencies) {
  const auto s = sample_population({ThreeSpike{}, 100000, 10, 3});
  double counts[3] = {0, 0, 0};
  for (double p : s.p) {
    if (p == 0.25) ++counts[0];
    else if (p == 0.5) ++counts[1];
    else if (p == 0.75) ++counts[2];
    else ADD_FAILURE() << "unexpected spike " << p;
  }
  for (double c : counts) EXPECT_NEAR(c / 100000.0, 1.0 / 3.0, 0.01);
}

TEST(SamplePopulation, TruncatedNormalStaysInUnitInterval) {
  const auto s = sample_population({TruncatedNormal{0.9, 0.3}, 20000, 5, 4});
  double mean = 0.0;
  for (double p : s.p) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    mean += p / 20000.0;
  }
  EXPECT_LT(mean, 0.9);
}

TEST(SamplePopulation, DeterministicGivenSeed) {
  const PopulationSpec spec{UniformPopulation{}, 1000, 6, 42};
  const auto a = sample_population(spec);
  const auto b = sample_population(spec);
  EXPECT_EQ(a.p, b.p);
  EXPECT_TRUE(std::equal(a.data.records().begin(), a.data.records().end(), b.data.records().begin()));
  auto other = spec;
  other.seed = 43;
  EXPECT_NE(sample_population(other).p, a.p);
}

TEST(SamplePopulation, CustomDistributionUsesItsAtoms) {
  const std::vector<double> loc{0.1, 0.8}, mass{0.25, 0.75};
  const auto s = sample_population({CustomPopulation{PointMassDistribution(loc, mass)}, 40000, 3, 5});
  double high = 0.0;
  for (double p : s.p) {
    EXPECT_TRUE(p == 0.1 || p == 0.8);
    high += p == 0.8;
  }
  EXPECT_NEAR(high / 40000.0, 0.75, 0.01);
}

TEST(SamplePopulation, RejectsInvalidSpecs) {
  EXPECT_THROW(sample_population({PointMass{1.5}, 10, 3, 0}), ValidationError);
  EXPECT_THROW(sample_population({ThreeSpike{}, 0, 3, 0}), ValidationError);
  EXPECT_THROW(sample_population({ThreeSpike{}, 10, 0, 0}), ValidationError);
}

TEST(PopulationSpec, Labels) {
  EXPECT_EQ((PopulationSpec{ThreeSpike{}, 1, 1, 0}.label()), "three_spike");
  EXPECT_EQ((PopulationSpec{UniformPopulation{}, 1, 1, 0}.label()), "uniform");
  EXPECT_EQ((PopulationSpec{TruncatedNormal{0.5, 0.15}, 1, 1, 0}.label()), "truncated_normal(0.5;0.15)");
  EXPECT_EQ((PopulationSpec{PointMass{0.5}, 1, 1, 0}.label()), "point_mass(0.5)");
}

TEST(EmpiricalDistribution, AllMaximalIsDeltaOne) {
  const BinomialDataset data({{4, 4}, {4, 4}});
  EXPECT_EQ(empirical_distribution(data), GriddedDistribution::point_mass(4, 4));
}

TEST(EmpiricalDistribution, ThreeOutcomes) {
  const auto dist = empirical_distribution(BinomialDataset({{0, 2}, {1, 2}, {2, 2}}));
  ASSERT_EQ(dist.grid_size(), 2u);
  for (double q : dist.masses()) EXPECT_NEAR(q, 1.0 / 3.0, 1e-15);
}

TEST(EmpiricalDistribution, PointMassHalfMatchesExactExpectation) {
  const double expected = testing::oracles()["binomial"]["empirical_emd_point_mass_half"]["10"].get<double>();
  EXPECT_NEAR(expected, 0.123, 5e-4);
  const auto s = sample_population({PointMass{0.5}, 200000, 10, 9});
  const double emd = emd_1d(empirical_distribution(s.data), GriddedDistribution::point_mass(10, 5));
  EXPECT_NEAR(emd, expected, 0.002);
}

TEST(EmpiricalDistribution, RequiresCommonTrials) {
  EXPECT_THROW(empirical_distribution(BinomialDataset({{0, 2}, {1, 3}})), ValidationError);
}

TEST(HistogramOf, MergesEqualValues) {
  const std::vector<double> p{0.5, 0.25, 0.5, 0.5};
  const auto h = histogram_of(p);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h.atoms()[0].location[0], 0.25);
  EXPECT_EQ(h.atoms()[0].mass, 0.25);
  EXPECT_EQ(h.atoms()[1].mass, 0.75);
}

TEST(GaussLegendre, OrderTwoAndThree) {
  const auto two = gauss_legendre(2);
  ASSERT_EQ(two.nodes.size(), 2u);
  EXPECT_NEAR(two.nodes[0], 0.5 - std::sqrt(3.0) / 6.0, 1e-14);
  EXPECT_NEAR(two.nodes[1], 0.5 + std::sqrt(3.0) / 6.0, 1e-14);
  EXPECT_NEAR(two.weights[0], 0.5, 1e-14);
  const auto three = gauss_legendre(3);
  EXPECT_NEAR(three.nodes[0], 0.5 - std::sqrt(0.15), 1e-14);
  EXPECT_NEAR(three.nodes[1], 0.5, 1e-14);
  EXPECT_NEAR(three.weights[0], 5.0 / 18.0, 1e-14);
  EXPECT_NEAR(three.weights[1], 8.0 / 18.0, 1e-14);
}

TEST(GaussLegendre, ExactToDegreeTwoOrderMinusOne) {
  for (std::size_t order = 1; order <= 16; ++order) {
    const auto rule = gauss_legendre(order);
    EXPECT_NEAR(std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0), 1.0, 1e-14);
    for (std::size_t k = 1; k <= 2 * order - 1; ++k) {
      double sum = 0.0;
      for (std::size_t i = 0; i < order; ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], k);
      EXPECT_NEAR(sum, 1.0 / static_cast<double>(k + 1), 1e-13) << order << "," << k;
    }
  }
}

TEST(MatchedMomentPair, ThreeTrials) {
  const auto [p, q] = matched_moment_pair(3);
  ASSERT_EQ(p.size(), 2u);
  ASSERT_EQ(q.size(), 3u);
  EXPECT_NEAR(p.atoms()[0].location[0], 0.21132, 1e-5);
  EXPECT_NEAR(p.atoms()[1].location[0], 0.78868, 1e-5);
  EXPECT_NEAR(q.atoms()[0].location[0], 0.11270, 1e-5);
  EXPECT_NEAR(q.atoms()[1].location[0], 0.5, 1e-12);
  EXPECT_NEAR(q.atoms()[2].location[0], 0.88730, 1e-5);
  const std::vector<double> expected{0.5, 1.0 / 3.0, 0.25};
  EXPECT_LE(testing::max_abs_diff(p.moments(3), expected), 1e-14);
  EXPECT_LE(testing::max_abs_diff(q.moments(3), expected), 1e-14);
}

TEST(MatchedMomentPair, IndistinguishableButDistinct) {
  for (std::size_t t = 1; t <= 30; ++t) {
    const auto [p, q] = matched_moment_pair(t);
    EXPECT_LE(testing::max_abs_diff(p.moments(t), q.moments(t)), 1e-9) << t;
    EXPECT_LE(testing::max_abs_diff(mixture_binomial_pmf(p, t), mixture_binomial_pmf(q, t)), 1e-9) << t;
    EXPECT_GT(emd_1d(p, q), 0.0);
  }
}

TEST(MixtureBinomialPmf, PointMassIsBinomial) {
  const std::vector<double> loc{0.3}, mass{1.0};
  const auto pmf = mixture_binomial_pmf(PointMassDistribution(loc, mass), 4);
  const double expected[5] = {0.2401, 0.4116, 0.2646, 0.0756, 0.0081};
  for (int k = 0; k <= 4; ++k) EXPECT_NEAR(pmf[k], expected[k], 1e-15);
}

TEST(DeriveSeed, DistinctStreams) {
  EXPECT_NE(derive_seed(0, 0), derive_seed(0, 1));
  EXPECT_NE(derive_seed(0, 1), derive_seed(1, 0));
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}

TEST(Median, OddAndEven) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_THROW(median({}), ValidationError);
}

TEST(RunSweep, PointMassRecoveryBeatsEmpirical) {
  const std::vector<PopulationSpec> specs{{PointMass{0.5}, 100000, 10, 1}};
  const auto report = run_sweep(specs, RecoveryConfig::defaults(10), 1);
  ASSERT_EQ(report.rows.size(), 1u);
  EXPECT_LT(report.rows[0].emd_recovered, report.rows[0].emd_empirical);
}

TEST(RunSweep, OneRowPerSpecAndTrial) {
  const std::vector<PopulationSpec> specs{{ThreeSpike{}, 500, 4, 2}, {UniformPopulation{}, 500, 4, 3}};
  const auto report = run_sweep(specs, RecoveryConfig::defaults(4), 3);
  ASSERT_EQ(report.rows.size(), 6u);
  EXPECT_TRUE(report.failures.empty());
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(report.rows[i].kind, i < 3 ? "three_spike" : "uniform");
    EXPECT_EQ(report.rows[i].trial, i % 3);
    EXPECT_EQ(report.rows[i].n, 500u);
    EXPECT_EQ(report.rows[i].t, 4u);
    EXPECT_GE(report.rows[i].emd_recovered, 0.0);
    EXPECT_GE(report.rows[i].emd_empirical, 0.0);
    EXPECT_EQ(report.rows[i].wall_time, 0.0);
  }
}

bool same_row(const ExperimentRow& a, const ExperimentRow& b) {
  return a.kind == b.kind && a.n == b.n && a.t == b.t && a.emd_recovered == b.emd_recovered &&
         a.emd_empirical == b.emd_empirical && a.objective == b.objective;
}

TEST(RunSweep, IdenticalSpecsGiveIdenticalRows) {
  const PopulationSpec spec{TruncatedNormal{}, 2000, 6, 17};
  const std::vector<PopulationSpec> specs{spec, spec};
  const auto report = run_sweep(specs, RecoveryConfig::defaults(6), 2);
  ASSERT_EQ(report.rows.size(), 4u);
  EXPECT_TRUE(same_row(report.rows[0], report.rows[2]));
  EXPECT_TRUE(same_row(report.rows[1], report.rows[3]));
  EXPECT_FALSE(same_row(report.rows[0], report.rows[1]));
}

TEST(RunSweep, ThreadCountDoesNotChangeRows) {
  const std::vector<PopulationSpec> specs{{ThreeSpike{}, 3000, 6, 5}, {UniformPopulation{}, 3000, 8, 6}};
  const auto serial = run_sweep(specs, RecoveryConfig::defaults(8), 3, {1, false});
  const auto parallel = run_sweep(specs, RecoveryConfig::defaults(8), 3, {4, false});
  ASSERT_EQ(serial.rows.size(), parallel.rows.size());
  for (std::size_t i = 0; i < serial.rows.size(); ++i) EXPECT_TRUE(same_row(serial.rows[i], parallel.rows[i]));
}

TEST(RunSweep, ReportCsvHeader) {
  ExperimentReport report;
  report.rows.push_back({"uniform", 10, 2, 0, 0.25, 0.5, 0.0, 0.0});
  std::ostringstream out;
  write_report_csv(report, out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "kind,n,t,trial,emd_recovered,emd_empirical,objective,wall_time");
}

}  // namespace
}  // namespace popkit
