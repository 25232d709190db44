#include "popkit/multivariate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "moment_program.hpp"
#include "popkit/error.hpp"
#include "popkit/moments.hpp"

namespace popkit {

namespace {

std::string describe(const MultiIndex& index) {
  std::string s = "(";
  for (std::size_t j = 0; j < index.exponents.size(); ++j) {
    if (j > 0) s += ",";
    s += std::to_string(index.exponents[j]);
  }
  return s + ")";
}

// Product of factors in ascending order, so the value does not depend on
// the order the coordinates were listed in.
double canonical_product(std::vector<double>& factors) {
  std::sort(factors.begin(), factors.end());
  double product = 1.0;
  for (double f : factors) product *= f;
  return product;
}

// Repeated multiplication, matching the univariate feature matrix bit for bit.
double grid_power(double x, std::size_t exponent) {
  double power = 1.0;
  for (std::size_t i = 0; i < exponent; ++i) power *= x;
  return power;
}

double canonical_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

void enumerate_with_degree(std::size_t dim, std::size_t remaining, std::vector<std::size_t>& prefix,
                           std::vector<MultiIndex>& out) {
  if (prefix.size() + 1 == dim) {
    prefix.push_back(remaining);
    out.push_back(MultiIndex{prefix});
    prefix.pop_back();
    return;
  }
  for (std::size_t a = remaining + 1; a-- > 0;) {
    prefix.push_back(a);
    enumerate_with_degree(dim, remaining - a, prefix, out);
    prefix.pop_back();
  }
}

// Index alpha of the relabelled problem (new axis j = old axis perm[j])
// corresponds to index alpha' of the original with alpha'[perm[j]] = alpha[j].
MultiIndex original_index(const MultiIndex& relabelled, const std::vector<std::size_t>& perm) {
  MultiIndex original{std::vector<std::size_t>(perm.size(), 0)};
  for (std::size_t j = 0; j < perm.size(); ++j) original.exponents[perm[j]] = relabelled.exponents[j];
  return original;
}

struct ProblemView {
  std::vector<double> values;
  std::vector<double> sigmas;

  friend auto operator<=>(const ProblemView&, const ProblemView&) = default;
};

ProblemView view_under(const MultiMomentEstimates& m, const std::vector<MultiIndex>& indices,
                       const std::vector<std::size_t>& perm) {
  ProblemView view;
  for (const MultiIndex& index : indices) {
    const MultiIndex original = original_index(index, perm);
    view.values.push_back(m.values.at(original));
    const auto s = m.sigma_hat.find(original);
    view.sigmas.push_back(s == m.sigma_hat.end() ? 0.0 : s->second);
  }
  return view;
}

std::vector<std::size_t> inverse(const std::vector<std::size_t>& perm) {
  std::vector<std::size_t> inv(perm.size());
  for (std::size_t j = 0; j < perm.size(); ++j) inv[perm[j]] = j;
  return inv;
}

}  // namespace

std::size_t MultiIndex::total_degree() const noexcept {
  return std::accumulate(exponents.begin(), exponents.end(), std::size_t{0});
}

std::vector<MultiIndex> enumerate_multi_indices(std::size_t dim, std::size_t max_total_degree) {
  if (dim == 0) throw ValidationError("enumerate_multi_indices: dim must be positive");
  std::vector<MultiIndex> out;
  std::vector<std::size_t> prefix;
  for (std::size_t degree = 1; degree <= max_total_degree; ++degree) {
    enumerate_with_degree(dim, degree, prefix, out);
  }
  return out;
}

MultiMomentEstimates estimate_multi_moments(std::span<const MultiObservation> data, std::size_t max_total_degree) {
  if (data.empty()) throw ValidationError("estimate_multi_moments: no records");
  if (max_total_degree == 0) throw ValidationError("estimate_multi_moments: max_total_degree must be positive");
  const std::size_t dim = data.front().size();
  if (dim == 0) throw ValidationError("estimate_multi_moments: records have no coordinates");

  const std::vector<MultiIndex> indices = enumerate_multi_indices(dim, max_total_degree);
  std::vector<std::size_t> count(indices.size(), 0);
  std::vector<double> mean(indices.size(), 0.0);
  std::vector<double> m2(indices.size(), 0.0);

  std::vector<std::vector<double>> ratios(dim);
  std::vector<double> factors;
  for (std::size_t e = 0; e < data.size(); ++e) {
    const MultiObservation& obs = data[e];
    if (obs.size() != dim) {
      throw ValidationError("estimate_multi_moments: record " + std::to_string(e) + " has " +
                            std::to_string(obs.size()) + " coordinates, expected " + std::to_string(dim));
    }
    for (std::size_t j = 0; j < dim; ++j) {
      validate(obs[j]);
      const std::size_t limit = std::min<std::size_t>(max_total_degree, obs[j].trials);
      ratios[j].assign(limit + 1, 1.0);
      for (std::size_t a = 1; a <= limit; ++a) ratios[j][a] = binomial_ratio(obs[j].successes, obs[j].trials, a);
    }
    for (std::size_t r = 0; r < indices.size(); ++r) {
      const auto& alpha = indices[r].exponents;
      bool usable = true;
      factors.clear();
      for (std::size_t j = 0; j < dim && usable; ++j) {
        if (alpha[j] >= ratios[j].size()) usable = false;
        else if (alpha[j] > 0) factors.push_back(ratios[j][alpha[j]]);
      }
      if (!usable) continue;
      const double term = canonical_product(factors);
      ++count[r];
      const double delta = term - mean[r];
      mean[r] += delta / static_cast<double>(count[r]);
      m2[r] += delta * (term - mean[r]);
    }
  }

  MultiMomentEstimates est;
  est.dim = dim;
  est.max_total_degree = max_total_degree;
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t n = count[r];
    if (n == 0) {
      throw ValidationError("estimate_multi_moments: no record has enough trials for index " + describe(indices[r]));
    }
    est.values[indices[r]] = std::clamp(mean[r], 0.0, 1.0);
    est.sigma_hat[indices[r]] =
        n > 1 ? std::sqrt(m2[r] / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
    est.n_used[indices[r]] = n;
  }
  return est;
}

MultiGriddedDistribution::MultiGriddedDistribution(std::size_t dim, std::size_t grid_size, std::vector<double> masses)
    : dim_(dim), grid_size_(grid_size), masses_(std::move(masses)) {
  if (dim_ == 0) throw ValidationError("MultiGriddedDistribution: dim must be positive");
  if (grid_size_ == 0) throw ValidationError("MultiGriddedDistribution: grid_size must be positive");
  std::size_t expected = 1;
  for (std::size_t j = 0; j < dim_; ++j) expected *= grid_size_ + 1;
  if (masses_.size() != expected) {
    throw ValidationError("MultiGriddedDistribution: expected " + std::to_string(expected) + " masses, got " +
                          std::to_string(masses_.size()));
  }
  double total = 0.0;
  for (double q : masses_) {
    if (!(q >= 0.0) || !std::isfinite(q)) throw ValidationError("MultiGriddedDistribution: invalid mass");
    total += q;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw ValidationError("MultiGriddedDistribution: masses sum to " + std::to_string(total));
  }
}

std::vector<std::size_t> MultiGriddedDistribution::cell_coordinates(std::size_t cell) const {
  std::vector<std::size_t> coords(dim_);
  for (std::size_t j = dim_; j-- > 0;) {
    coords[j] = cell % (grid_size_ + 1);
    cell /= grid_size_ + 1;
  }
  return coords;
}

std::size_t MultiGriddedDistribution::cell_index(std::span<const std::size_t> coordinates) const {
  std::size_t cell = 0;
  for (std::size_t j = 0; j < dim_; ++j) cell = cell * (grid_size_ + 1) + coordinates[j];
  return cell;
}

GriddedDistribution MultiGriddedDistribution::marginal(std::size_t axis) const {
  if (axis >= dim_) throw ValidationError("marginal: axis out of range");
  std::vector<std::vector<double>> per_value(grid_size_ + 1);
  for (std::size_t c = 0; c < masses_.size(); ++c) {
    per_value[cell_coordinates(c)[axis]].push_back(masses_[c]);
  }
  std::vector<double> q(grid_size_ + 1);
  for (std::size_t i = 0; i <= grid_size_; ++i) q[i] = canonical_sum(per_value[i]);
  return GriddedDistribution(grid_size_, std::move(q));
}

MultiGriddedDistribution MultiGriddedDistribution::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != dim_) throw ValidationError("permuted: permutation has wrong length");
  std::vector<double> out(masses_.size(), 0.0);
  std::vector<std::size_t> relabelled(dim_);
  for (std::size_t c = 0; c < masses_.size(); ++c) {
    const auto coords = cell_coordinates(c);
    for (std::size_t j = 0; j < dim_; ++j) relabelled[j] = coords[perm[j]];
    out[cell_index(relabelled)] = masses_[c];
  }
  return MultiGriddedDistribution(dim_, grid_size_, std::move(out));
}

double MultiGriddedDistribution::moment(const MultiIndex& index) const {
  if (index.dim() != dim_) throw ValidationError("moment: index dimension mismatch");
  std::vector<double> terms;
  std::vector<double> factors;
  for (std::size_t c = 0; c < masses_.size(); ++c) {
    if (masses_[c] == 0.0) continue;
    const auto coords = cell_coordinates(c);
    factors.clear();
    for (std::size_t j = 0; j < dim_; ++j) {
      if (index.exponents[j] == 0) continue;
      const double x = static_cast<double>(coords[j]) / static_cast<double>(grid_size_);
      factors.push_back(grid_power(x, index.exponents[j]));
    }
    factors.push_back(masses_[c]);
    terms.push_back(canonical_product(factors));
  }
  return canonical_sum(terms);
}

MultiMomentEstimates exact_multi_moments(const MultiGriddedDistribution& dist, std::size_t max_total_degree) {
  MultiMomentEstimates est;
  est.dim = dist.dim();
  est.max_total_degree = max_total_degree;
  for (const MultiIndex& index : enumerate_multi_indices(dist.dim(), max_total_degree)) {
    est.values[index] = dist.moment(index);
    est.sigma_hat[index] = 0.0;
    est.n_used[index] = 0;
  }
  return est;
}

std::size_t default_multi_grid(std::size_t dim) {
  switch (dim) {
    case 1: return 100;
    case 2: return 20;
    case 3: return 10;
    default: throw ValidationError("default_multi_grid: dimension must be 1, 2 or 3");
  }
}

PointMassDistribution to_point_masses(const MultiGriddedDistribution& dist) {
  std::vector<Atom> atoms;
  for (std::size_t c = 0; c < dist.cells(); ++c) {
    const double q = dist.masses()[c];
    if (q <= 0.0) continue;
    Atom atom;
    atom.mass = q;
    for (std::size_t i : dist.cell_coordinates(c)) {
      atom.location.push_back(static_cast<double>(i) / static_cast<double>(dist.grid_size()));
    }
    atoms.push_back(std::move(atom));
  }
  return PointMassDistribution(std::move(atoms));
}

MultiRecoveryResult recover_multi(const MultiMomentEstimates& moments, const RecoveryConfig& config,
                                  std::size_t grid_per_axis) {
  const std::size_t dim = moments.dim;
  if (dim < 1 || dim > 3) throw ValidationError("recover_multi: dimension must be 1, 2 or 3");
  if (config.k_max == 0) throw ValidationError("recover_multi: k_max must be positive");
  if (grid_per_axis == 0) throw ValidationError("recover_multi: grid_per_axis must be positive");
  std::size_t cells = 1;
  for (std::size_t j = 0; j < dim; ++j) {
    cells *= grid_per_axis + 1;
    if (cells > kMaxMultiCells) {
      throw ResourceError("recover_multi: grid of (" + std::to_string(grid_per_axis) + "+1)^" + std::to_string(dim) +
                          " cells exceeds " + std::to_string(kMaxMultiCells) + "; choose a smaller grid per axis");
    }
  }

  const std::vector<MultiIndex> indices = enumerate_multi_indices(dim, config.k_max);
  for (const MultiIndex& index : indices) {
    if (!moments.values.contains(index)) {
      throw ValidationError("recover_multi: missing moment for index " + describe(index));
    }
  }

  // Canonical axis order: the relabelling whose moment vector is smallest.
  std::vector<std::size_t> perm(dim);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  const ProblemView identity_view = view_under(moments, indices, perm);
  std::vector<std::size_t> canonical = perm;
  ProblemView canonical_view = identity_view;
  std::vector<std::vector<std::size_t>> stabiliser;
  do {
    const ProblemView v = view_under(moments, indices, perm);
    if (v == identity_view) stabiliser.push_back(perm);
    if (v < canonical_view) {
      canonical_view = v;
      canonical = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  detail::MomentProgram program;
  program.rows = indices.size();
  program.cells = cells;
  program.features.resize(program.rows * program.cells);
  const MultiGriddedDistribution layout(dim, grid_per_axis, [&] {
    std::vector<double> q(cells, 0.0);
    q[0] = 1.0;
    return q;
  }());
  std::vector<double> factors;
  for (std::size_t c = 0; c < cells; ++c) {
    const auto coords = layout.cell_coordinates(c);
    for (std::size_t r = 0; r < program.rows; ++r) {
      factors.clear();
      for (std::size_t j = 0; j < dim; ++j) {
        const std::size_t a = indices[r].exponents[j];
        if (a == 0) continue;
        const double x = static_cast<double>(coords[j]) / static_cast<double>(grid_per_axis);
        factors.push_back(grid_power(x, a));
      }
      program.features[r * cells + c] = canonical_product(factors);
    }
  }
  program.targets = canonical_view.values;
  for (double& t : program.targets) t = std::clamp(t, 0.0, 1.0);
  program.weights.assign(program.rows, 1.0);
  if (config.weight_mode == WeightMode::InverseStd) {
    for (std::size_t r = 0; r < program.rows; ++r) {
      program.weights[r] = 1.0 / std::max(canonical_view.sigmas[r], config.weight_floor);
    }
    const double smallest = *std::min_element(program.weights.begin(), program.weights.end());
    for (double& w : program.weights) w /= smallest;
  }

  const detail::ProgramSolution sol = config.objective == Objective::L1
                                          ? detail::solve_l1(program, config.lp_tolerance)
                                          : detail::solve_l2(program, config.qp_tolerance, config.qp_max_iters);

  const MultiGriddedDistribution solved(dim, grid_per_axis, sol.masses);
  MultiGriddedDistribution result = solved.permuted(inverse(canonical));

  if (stabiliser.size() > 1) {
    std::vector<std::vector<double>> contributions(cells);
    for (const auto& sigma : stabiliser) {
      const MultiGriddedDistribution image = result.permuted(sigma);
      for (std::size_t c = 0; c < cells; ++c) contributions[c].push_back(image.masses()[c]);
    }
    std::vector<double> averaged(cells);
    for (std::size_t c = 0; c < cells; ++c) {
      averaged[c] = canonical_sum(contributions[c]) / static_cast<double>(stabiliser.size());
    }
    result = MultiGriddedDistribution(dim, grid_per_axis, std::move(averaged));
  }

  // Objective of the returned distribution, evaluated in the canonical frame.
  const MultiGriddedDistribution canonical_result = result.permuted(canonical);
  const std::vector<double> canonical_masses(canonical_result.masses().begin(), canonical_result.masses().end());
  const double objective =
      detail::program_objective(program, canonical_masses, config.objective == Objective::L1);
  return MultiRecoveryResult{std::move(result), objective};
}

}  // namespace popkit
