#include "popkit/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "popkit/error.hpp"
#include "popkit/simplex_lp.hpp"

namespace popkit {

namespace {

struct SignedAtom {
  double location;
  double mass;  // positive for p, negative for q
};

double ground_distance(const std::vector<double>& a, const std::vector<double>& b, GroundMetric metric) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    total += metric == GroundMetric::L1 ? std::abs(d) : d * d;
  }
  return metric == GroundMetric::L1 ? total : std::sqrt(total);
}

}  // namespace

double emd_1d(const PointMassDistribution& p, const PointMassDistribution& q) {
  if (p.dim() != 1 || q.dim() != 1) throw ValidationError("emd_1d: distributions must be one-dimensional");
  std::vector<SignedAtom> merged;
  merged.reserve(p.size() + q.size());
  for (const Atom& a : p.atoms()) merged.push_back({a.location[0], a.mass});
  for (const Atom& a : q.atoms()) merged.push_back({a.location[0], -a.mass});
  std::stable_sort(merged.begin(), merged.end(),
                   [](const SignedAtom& a, const SignedAtom& b) { return a.location < b.location; });

  // CDF gap is piecewise constant between consecutive locations.
  double gap = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
    gap += merged[i].mass;
    total += std::abs(gap) * (merged[i + 1].location - merged[i].location);
  }
  return total;
}

double emd_1d(const GriddedDistribution& p, const GriddedDistribution& q) {
  return emd_1d(to_point_masses(p), to_point_masses(q));
}

double emd_transport(const PointMassDistribution& p, const PointMassDistribution& q, GroundMetric metric) {
  if (p.dim() != q.dim()) throw ValidationError("emd_transport: dimension mismatch");
  if (p.size() > kMaxTransportAtoms || q.size() > kMaxTransportAtoms) {
    throw ResourceError("emd_transport: at most " + std::to_string(kMaxTransportAtoms) +
                        " atoms per distribution (got " + std::to_string(p.size()) + " and " +
                        std::to_string(q.size()) + ")");
  }
  const std::size_t np = p.size();
  const std::size_t nq = q.size();
  // Rows 0..np-1: mass leaving p-atom i. Rows np..np+nq-1: mass reaching q-atom j.
  LinearProgram lp(np + nq);
  for (std::size_t i = 0; i < np; ++i) lp.set_rhs(i, p.atoms()[i].mass);
  for (std::size_t j = 0; j < nq; ++j) lp.set_rhs(np + j, q.atoms()[j].mass);
  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t j = 0; j < nq; ++j) {
      const LinearProgram::Entry column[] = {{i, 1.0}, {np + j, 1.0}};
      lp.add_variable(ground_distance(p.atoms()[i].location, q.atoms()[j].location, metric), column);
    }
  }
  SimplexOptions options;
  options.feasibility_tol = 1e-10;
  const LpSolution sol = solve_simplex(lp, options);
  if (sol.status != LpStatus::Optimal) {
    throw SolverError("emd_transport: coupling program did not reach an optimum", sol.x, sol.objective);
  }
  return std::max(sol.objective, 0.0);
}

}  // namespace popkit
