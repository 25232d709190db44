#pragma once

// Shared solver core for univariate and multivariate recovery.

#include <cstddef>
#include <vector>

namespace popkit::detail {

/// minimize  sum_k w_k |(F q)_k - b_k|   (L1)
///       or  sum_k w_k^2 ((F q)_k - b_k)^2   (L2)
/// over the probability simplex. F is rows x cells, row-major.
struct MomentProgram {
  std::size_t rows = 0;
  std::size_t cells = 0;
  std::vector<double> features;
  std::vector<double> targets;
  std::vector<double> weights;

  double feature(std::size_t row, std::size_t cell) const { return features[row * cells + cell]; }
};

struct ProgramSolution {
  std::vector<double> masses;
  double objective = 0.0;
  std::size_t iterations = 0;
};

ProgramSolution solve_l1(const MomentProgram& program, double tolerance);

/// Throws SolverError carrying the best iterate when max_iters is reached.
ProgramSolution solve_l2(const MomentProgram& program, double tolerance, std::size_t max_iters);

/// Euclidean projection of v onto the probability simplex.
void project_to_simplex(std::vector<double>& v);

double program_objective(const MomentProgram& program, const std::vector<double>& masses, bool l1);

}  // namespace popkit::detail
