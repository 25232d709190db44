#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "popkit/binomial.hpp"
#include "popkit/distribution.hpp"
#include "popkit/moments.hpp"
#include "popkit/multivariate.hpp"
#include "popkit/population.hpp"

namespace popkit {

/// Shortest-round-trip-safe decimal rendering ("%.17g").
std::string format_number(double value);

/// CSV with header containing `successes` and `trials` columns (an
/// `entity_id` column is accepted and ignored). Errors name the line.
BinomialDataset parse_dataset(std::istream& in, const std::string& source = "<input>");
BinomialDataset parse_dataset(const std::filesystem::path& path);

/// CSV with columns successes_1, trials_1, ..., successes_d, trials_d.
std::vector<MultiObservation> parse_multi_dataset(std::istream& in, std::size_t dim,
                                                  const std::string& source = "<input>");
std::vector<MultiObservation> parse_multi_dataset(const std::filesystem::path& path, std::size_t dim);

enum class DistributionFormat { Json, CsvCdf };

/// JSON `{"grid_size": m, "masses": [...]}`.
void write_distribution_json(const GriddedDistribution& dist, std::ostream& out);
/// Rows `x,cdf` at every grid point; the last cumulative value is exactly 1.
void write_distribution_cdf(const GriddedDistribution& dist, std::ostream& out);

/// JSON `{"dim": d, "grid_size": m, "masses": [...]}`, masses row-major.
void write_distribution_json(const MultiGriddedDistribution& dist, std::ostream& out);
/// Rows `x1,...,xd,mass`, one per cell.
void write_distribution_cells(const MultiGriddedDistribution& dist, std::ostream& out);

void emit_distribution(const GriddedDistribution& dist, const std::filesystem::path& path, DistributionFormat format);
void emit_distribution(const MultiGriddedDistribution& dist, const std::filesystem::path& path,
                       DistributionFormat format);

using AnyDistribution = std::variant<GriddedDistribution, MultiGriddedDistribution>;

/// Documents with a `dim` member are read as multivariate.
AnyDistribution read_distribution_json(std::istream& in, const std::string& source = "<input>");
AnyDistribution read_distribution_json(const std::filesystem::path& path);

/// JSON `{"k_max", "beta", "sigma_hat", "n_used"}`.
void write_moments_json(const MomentEstimates& est, std::ostream& out);

/// Sweep specification: a JSON array of `{kind, params, n, t[, seed]}`.
/// Entries without a seed get derive_seed(master_seed, position).
std::vector<PopulationSpec> parse_sweep_spec(std::istream& in, std::uint64_t master_seed,
                                             const std::string& source = "<input>");

}  // namespace popkit
