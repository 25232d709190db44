#include "popkit/distribution.hpp"

#include <cmath>
#include <string>

#include "popkit/error.hpp"

namespace popkit {

GriddedDistribution::GriddedDistribution(std::size_t grid_size, std::vector<double> masses)
    : grid_size_(grid_size), masses_(std::move(masses)) {
  if (grid_size_ == 0) throw ValidationError("GriddedDistribution: grid_size must be positive");
  if (masses_.size() != grid_size_ + 1) {
    throw ValidationError("GriddedDistribution: expected " + std::to_string(grid_size_ + 1) +
                          " masses, got " + std::to_string(masses_.size()));
  }
  double total = 0.0;
  for (double q : masses_) {
    if (!(q >= 0.0) || !std::isfinite(q)) {
      throw ValidationError("GriddedDistribution: masses must be finite and nonnegative");
    }
    total += q;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw ValidationError("GriddedDistribution: masses sum to " + std::to_string(total));
  }
}

GriddedDistribution GriddedDistribution::point_mass(std::size_t grid_size, std::size_t index) {
  if (index > grid_size) throw ValidationError("point_mass: index outside grid");
  std::vector<double> q(grid_size + 1, 0.0);
  q[index] = 1.0;
  return GriddedDistribution(grid_size, std::move(q));
}

GriddedDistribution GriddedDistribution::uniform(std::size_t grid_size) {
  return GriddedDistribution(grid_size,
                             std::vector<double>(grid_size + 1, 1.0 / static_cast<double>(grid_size + 1)));
}

std::vector<double> moments_of(const GriddedDistribution& dist, std::size_t k_max) {
  std::vector<double> out(k_max, 0.0);
  const auto q = dist.masses();
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] == 0.0) continue;
    const double x = dist.location(i);
    double power = 1.0;
    for (std::size_t k = 0; k < k_max; ++k) {
      power *= x;
      out[k] += q[i] * power;
    }
  }
  return out;
}

PointMassDistribution::PointMassDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw ValidationError("PointMassDistribution: no atoms");
  dim_ = atoms_.front().location.size();
  if (dim_ == 0) throw ValidationError("PointMassDistribution: zero-dimensional atom");
  double total = 0.0;
  for (const Atom& a : atoms_) {
    if (a.location.size() != dim_) throw ValidationError("PointMassDistribution: mixed dimensions");
    if (!(a.mass > 0.0) || !std::isfinite(a.mass)) {
      throw ValidationError("PointMassDistribution: masses must be positive");
    }
    for (double x : a.location) {
      if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("PointMassDistribution: location outside [0,1]");
    }
    total += a.mass;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw ValidationError("PointMassDistribution: masses sum to " + std::to_string(total));
  }
}

namespace {
std::vector<Atom> zip_atoms(std::span<const double> locations, std::span<const double> masses) {
  if (locations.size() != masses.size()) {
    throw ValidationError("PointMassDistribution: locations and masses differ in length");
  }
  std::vector<Atom> atoms;
  atoms.reserve(locations.size());
  for (std::size_t i = 0; i < locations.size(); ++i) atoms.push_back(Atom{{locations[i]}, masses[i]});
  return atoms;
}
}  // namespace

PointMassDistribution::PointMassDistribution(std::span<const double> locations,
                                             std::span<const double> masses)
    : PointMassDistribution(zip_atoms(locations, masses)) {}

std::vector<double> PointMassDistribution::moments(std::size_t k_max) const {
  if (dim_ != 1) throw ValidationError("PointMassDistribution::moments: distribution is not 1-D");
  std::vector<double> out(k_max, 0.0);
  for (const Atom& a : atoms_) {
    double power = 1.0;
    for (std::size_t k = 0; k < k_max; ++k) {
      power *= a.location[0];
      out[k] += a.mass * power;
    }
  }
  return out;
}

PointMassDistribution to_point_masses(const GriddedDistribution& dist) {
  std::vector<Atom> atoms;
  const auto q = dist.masses();
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] > 0.0) atoms.push_back(Atom{{dist.location(i)}, q[i]});
  }
  return PointMassDistribution(std::move(atoms));
}

}  // namespace popkit
