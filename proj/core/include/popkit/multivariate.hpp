#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "popkit/binomial.hpp"
#include "popkit/distribution.hpp"
#include "popkit/recovery.hpp"

namespace popkit {

/// Exponent vector of a mixed moment E[prod_j p_j^{a_j}].
struct MultiIndex {
  std::vector<std::size_t> exponents;

  std::size_t dim() const noexcept { return exponents.size(); }
  std::size_t total_degree() const noexcept;

  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
};

/// All multi-indices of dimension `dim` with 1 <= |a| <= max_total_degree,
/// ordered by total degree, then lexicographically descending, so that
/// dim = 1 yields 1, 2, ..., max_total_degree.
std::vector<MultiIndex> enumerate_multi_indices(std::size_t dim, std::size_t max_total_degree);

/// One entity: one observation per coordinate.
using MultiObservation = std::vector<BinomialObservation>;

struct MultiMomentEstimates {
  std::size_t dim = 0;
  std::size_t max_total_degree = 0;
  std::map<MultiIndex, double> values;
  std::map<MultiIndex, double> sigma_hat;
  std::map<MultiIndex, std::size_t> n_used;
};

/// Mean over entities of prod_j binomial_ratio(X_ij, t_ij, a_j). Entities
/// with some t_ij < a_j are left out of that index's average.
MultiMomentEstimates estimate_multi_moments(std::span<const MultiObservation> data, std::size_t max_total_degree);

/// Masses on the product grid {0, 1/m, ..., 1}^d, flattened row-major
/// (axis 0 varies slowest).
class MultiGriddedDistribution {
 public:
  MultiGriddedDistribution(std::size_t dim, std::size_t grid_size, std::vector<double> masses);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t grid_size() const noexcept { return grid_size_; }
  std::size_t cells() const noexcept { return masses_.size(); }
  std::span<const double> masses() const noexcept { return masses_; }

  std::vector<std::size_t> cell_coordinates(std::size_t cell) const;
  std::size_t cell_index(std::span<const std::size_t> coordinates) const;

  /// Axis-aligned marginal.
  GriddedDistribution marginal(std::size_t axis) const;

  /// Relabels axes: new axis j is old axis perm[j].
  MultiGriddedDistribution permuted(std::span<const std::size_t> perm) const;

  double moment(const MultiIndex& index) const;

  friend bool operator==(const MultiGriddedDistribution&, const MultiGriddedDistribution&) = default;

 private:
  std::size_t dim_;
  std::size_t grid_size_;
  std::vector<double> masses_;
};

/// Largest number of grid cells accepted by `recover_multi`.
inline constexpr std::size_t kMaxMultiCells = 100'000;

/// m_d default: 20 for two dimensions, 10 for three, 100 for one.
std::size_t default_multi_grid(std::size_t dim);

PointMassDistribution to_point_masses(const MultiGriddedDistribution& dist);

struct MultiRecoveryResult {
  MultiGriddedDistribution distribution;
  double objective = 0.0;
};

/// Moment matching on the product grid: one program row per multi-index
/// with 1 <= |a| <= config.k_max. `config.grid_size` is ignored in favour
/// of `grid_per_axis`. Weights come from `sigma_hat` under InverseStd.
///
/// The result is equivariant under coordinate relabelling: the program is
/// solved in a canonical axis order and symmetrised over axis permutations
/// that leave the input unchanged.
MultiRecoveryResult recover_multi(const MultiMomentEstimates& moments, const RecoveryConfig& config,
                                  std::size_t grid_per_axis);

/// Exact mixed moments of a distribution for every index in `indices`.
MultiMomentEstimates exact_multi_moments(const MultiGriddedDistribution& dist, std::size_t max_total_degree);

}  // namespace popkit
