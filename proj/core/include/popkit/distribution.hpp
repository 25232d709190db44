#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace popkit {

/// Probability masses on the uniform grid {0, 1/m, ..., 1}.
class GriddedDistribution {
 public:
  /// Masses must be nonnegative and sum to 1 within 1e-9; `masses.size()`
  /// must equal `grid_size + 1`.
  GriddedDistribution(std::size_t grid_size, std::vector<double> masses);

  static GriddedDistribution point_mass(std::size_t grid_size, std::size_t index);
  static GriddedDistribution uniform(std::size_t grid_size);

  std::size_t grid_size() const noexcept { return grid_size_; }
  std::span<const double> masses() const noexcept { return masses_; }
  double location(std::size_t i) const noexcept {
    return static_cast<double>(i) / static_cast<double>(grid_size_);
  }

  friend bool operator==(const GriddedDistribution&, const GriddedDistribution&) = default;

 private:
  std::size_t grid_size_;
  std::vector<double> masses_;
};

/// Tolerance on the total mass of any distribution.
inline constexpr double kMassTolerance = 1e-9;

/// First k_max raw moments sum_i q_i (i/m)^k, k = 1..k_max.
std::vector<double> moments_of(const GriddedDistribution& dist, std::size_t k_max);

struct Atom {
  std::vector<double> location;
  double mass = 0.0;
};

/// Finitely supported distribution on [0,1]^d.
class PointMassDistribution {
 public:
  explicit PointMassDistribution(std::vector<Atom> atoms);

  /// One-dimensional convenience constructor.
  PointMassDistribution(std::span<const double> locations, std::span<const double> masses);

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  std::size_t dim() const noexcept { return dim_; }

  /// First k_max raw moments of a one-dimensional distribution.
  std::vector<double> moments(std::size_t k_max) const;

 private:
  std::vector<Atom> atoms_;
  std::size_t dim_ = 0;
};

/// Atoms (i/m, q_i) for every q_i > 0.
PointMassDistribution to_point_masses(const GriddedDistribution& dist);

}  // namespace popkit
