#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "popkit/dataset_io.hpp"
#include "popkit/error.hpp"
#include "popkit/rng.hpp"
#include "test_support.hpp"

namespace popkit {
namespace {

BinomialDataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_dataset(in, "data.csv");
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(ParseDataset, TwoRows) {
  const auto data = parse("entity_id,successes,trials\na,1,2\nb,2,2\n");
  ASSERT_EQ(data.size(), 2u);
  EXPECT_EQ(data[0], (BinomialObservation{1, 2}));
  EXPECT_EQ(data[1], (BinomialObservation{2, 2}));
  ASSERT_TRUE(data.common_trials().has_value());
  EXPECT_EQ(*data.common_trials(), 2u);
}

TEST(ParseDataset, ColumnOrderAndCrlfTolerated) {
  const auto data = parse("trials,successes\r\n5,3\r\n4,0\r\n");
  ASSERT_EQ(data.size(), 2u);
  EXPECT_EQ(data[0], (BinomialObservation{3, 5}));
  EXPECT_FALSE(data.common_trials().has_value());
}

TEST(ParseDataset, EmptyBodyReportsNoRecords) {
  const auto message = error_of([] { parse("entity_id,successes,trials\n"); });
  EXPECT_NE(message.find("no records"), std::string::npos) << message;
}

TEST(ParseDataset, SuccessesAboveTrialsNamesLineAndEntity) {
  const auto message = error_of([] { parse("entity_id,successes,trials\na,1,2\nbob,3,2\n"); });
  EXPECT_NE(message.find("data.csv:3"), std::string::npos) << message;
  EXPECT_NE(message.find("bob"), std::string::npos) << message;
  EXPECT_THROW(parse("entity_id,successes,trials\nbob,3,2\n"), ValidationError);
}

TEST(ParseDataset, MalformedRowNamesLine) {
  EXPECT_NE(error_of([] { parse("successes,trials\n1,2\n1\n"); }).find("data.csv:3"), std::string::npos);
  EXPECT_NE(error_of([] { parse("successes,trials\n1,2\nx,2\n"); }).find("data.csv:3"), std::string::npos);
  EXPECT_NE(error_of([] { parse("successes,trials\n-1,2\n"); }).find("data.csv:2"), std::string::npos);
}

TEST(ParseDataset, MissingColumnOrHeader) {
  EXPECT_THROW(parse("entity_id,successes\na,1\n"), ValidationError);
  EXPECT_THROW(parse(""), ValidationError);
}

TEST(ParseDataset, MissingFileIsIoError) {
  EXPECT_THROW(parse_dataset(std::filesystem::path("/nonexistent/popkit/data.csv")), IoError);
}

TEST(ParseMultiDataset, TwoCoordinates) {
  std::istringstream in("entity_id,successes_1,trials_1,successes_2,trials_2\na,1,2,0,3\nb,2,2,3,3\n");
  const auto data = parse_multi_dataset(in, 2);
  ASSERT_EQ(data.size(), 2u);
  EXPECT_EQ(data[0][1], (BinomialObservation{0, 3}));
  EXPECT_EQ(data[1][0], (BinomialObservation{2, 2}));
}

TEST(ParseMultiDataset, RejectsMissingCoordinate) {
  std::istringstream in("successes_1,trials_1\n1,2\n");
  EXPECT_THROW(parse_multi_dataset(in, 2), ValidationError);
}

TEST(DistributionCdf, DeltaOne) {
  std::ostringstream out;
  write_distribution_cdf(GriddedDistribution::point_mass(2, 2), out);
  EXPECT_EQ(out.str(), "x,cdf\n0,0\n0.5,0\n1,1\n");
}

TEST(DistributionCdf, UniformOnTwoPoints) {
  std::ostringstream out;
  write_distribution_cdf(GriddedDistribution(1, {0.5, 0.5}), out);
  EXPECT_EQ(out.str(), "x,cdf\n0,0.5\n1,1\n");
}

TEST(DistributionCdf, FinalValueForcedToOne) {
  std::ostringstream out;
  write_distribution_cdf(GriddedDistribution(10, std::vector<double>(11, 1.0 / 11.0)), out);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(text.rfind("1,")), "1,1\n");
}

TEST(DistributionJson, RoundTripIsBitwise) {
  Engine rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto dist = testing::random_grid_distribution(rng, 37, 12);
    std::stringstream buffer;
    write_distribution_json(dist, buffer);
    const auto back = std::get<GriddedDistribution>(read_distribution_json(buffer));
    EXPECT_EQ(back, dist);
  }
}

TEST(DistributionJson, MultivariateRoundTrip) {
  std::vector<double> masses(9, 0.0);
  masses[1] = 0.3;
  masses[7] = 0.7;
  const MultiGriddedDistribution dist(2, 2, masses);
  std::stringstream buffer;
  write_distribution_json(dist, buffer);
  EXPECT_EQ(std::get<MultiGriddedDistribution>(read_distribution_json(buffer)), dist);
}

TEST(DistributionJson, RejectsMalformedDocuments) {
  std::istringstream bad_json("{not json");
  EXPECT_THROW(read_distribution_json(bad_json), ValidationError);
  std::istringstream no_masses(R"({"grid_size": 2})");
  EXPECT_THROW(read_distribution_json(no_masses), ValidationError);
  std::istringstream bad_sum(R"({"grid_size": 1, "masses": [0.5, 0.6]})");
  EXPECT_THROW(read_distribution_json(bad_sum), ValidationError);
}

TEST(DistributionCells, OneRowPerCell) {
  std::vector<double> masses(4, 0.25);
  std::ostringstream out;
  write_distribution_cells(MultiGriddedDistribution(2, 1, masses), out);
  EXPECT_EQ(out.str(), "x1,x2,mass\n0,0,0.25\n0,1,0.25\n1,0,0.25\n1,1,0.25\n");
}

TEST(EmitDistribution, WritesFileAndReportsPathOnFailure) {
  const auto dir = std::filesystem::temp_directory_path() / "popkit_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "dist.json";
  const auto dist = GriddedDistribution::uniform(4);
  emit_distribution(dist, path, DistributionFormat::Json);
  EXPECT_EQ(std::get<GriddedDistribution>(read_distribution_json(path)), dist);
  const auto message =
      error_of([&] { emit_distribution(dist, dir / "missing" / "x.json", DistributionFormat::CsvCdf); });
  EXPECT_NE(message.find("missing"), std::string::npos) << message;
  EXPECT_THROW(emit_distribution(dist, dir / "missing" / "x.json", DistributionFormat::Json), IoError);
  std::filesystem::remove_all(dir);
}

TEST(MomentsJson, Fields) {
  MomentEstimates est;
  est.k_max = 2;
  est.beta = {0.75, 0.5};
  est.sigma_hat = {0.25, 0.5};
  est.n_used = {2, 2};
  std::ostringstream out;
  write_moments_json(est, out);
  const auto doc = nlohmann::json::parse(out.str());
  EXPECT_EQ(doc["k_max"], 2);
  EXPECT_EQ(doc["beta"][0].get<double>(), 0.75);
  EXPECT_EQ(doc["sigma_hat"][1].get<double>(), 0.5);
  EXPECT_EQ(doc["n_used"][1], 2);
}

TEST(FormatNumber, ShortestExactForms) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(1.0), "1");
  const double third = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_number(third)), third);
}

TEST(SweepSpec, KindsParamsAndSeeds) {
  std::istringstream in(R"([
    {"kind": "three_spike", "n": 100, "t": 10},
    {"kind": "truncated_normal", "params": {"mean": 0.4, "sd": 0.2}, "n": 50, "t": 4, "seed": 9},
    {"kind": "uniform", "n": 10, "t": 2},
    {"kind": "point_mass", "params": {"value": 0.25}, "n": 10, "t": 2},
    {"kind": "custom", "params": {"atoms": [[0.1, 0.5], [0.9, 0.5]]}, "n": 10, "t": 2}
  ])");
  const auto specs = parse_sweep_spec(in, 77);
  ASSERT_EQ(specs.size(), 5u);
  EXPECT_TRUE(std::holds_alternative<ThreeSpike>(specs[0].kind));
  EXPECT_EQ(specs[0].seed, derive_seed(77, 0));
  EXPECT_EQ(specs[1].seed, 9u);
  EXPECT_EQ(std::get<TruncatedNormal>(specs[1].kind).sd, 0.2);
  EXPECT_EQ(std::get<PointMass>(specs[3].kind).value, 0.25);
  EXPECT_EQ(std::get<CustomPopulation>(specs[4].kind).distribution.size(), 2u);
  EXPECT_EQ(specs[1].n, 50u);
  EXPECT_EQ(specs[1].t, 4u);
}

TEST(SweepSpec, RejectsBadEntries) {
  for (const char* text : {"[]", R"([{"n": 1, "t": 1}])", R"([{"kind": "mystery", "n": 1, "t": 1}])",
                           R"([{"kind": "uniform", "n": 0, "t": 1}])",
                           R"([{"kind": "point_mass", "params": {"value": 2}, "n": 1, "t": 1}])"}) {
    std::istringstream in(text);
    EXPECT_THROW(parse_sweep_spec(in, 0), ValidationError) << text;
  }
}

}  // namespace
}  // namespace popkit
