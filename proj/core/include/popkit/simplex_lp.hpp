#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace popkit {

/// Linear program in bounded standard form:
///
///   minimize c^T x  subject to  A x = b,  0 <= x_j <= upper_j.
///
/// Columns are stored sparsely; `upper_j` may be infinite.
class LinearProgram {
 public:
  struct Entry {
    std::size_t row;
    double value;
  };

  explicit LinearProgram(std::size_t rows);

  /// Appends a column and returns its index.
  std::size_t add_variable(double cost, std::span<const Entry> column,
                           double upper = std::numeric_limits<double>::infinity());

  void set_rhs(std::size_t row, double value);

  std::size_t rows() const noexcept { return rhs_.size(); }
  std::size_t columns() const noexcept { return costs_.size(); }

  double cost(std::size_t j) const { return costs_[j]; }
  double upper(std::size_t j) const { return upper_[j]; }
  double rhs(std::size_t i) const { return rhs_[i]; }
  std::span<const Entry> column(std::size_t j) const;

 private:
  std::vector<double> rhs_;
  std::vector<double> costs_;
  std::vector<double> upper_;
  std::vector<std::size_t> col_start_{0};
  std::vector<Entry> entries_;
};

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-11;
  double pivot_tol = 1e-11;
  std::size_t max_iterations = 1'000'000;
  std::size_t refactor_every = 64;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::IterationLimit;
  std::vector<double> x;
  double objective = 0.0;
  std::size_t iterations = 0;
};

/// Two-phase bounded-variable primal simplex. Entering and leaving
/// variables follow Bland's smallest-index rule, so the pivot sequence is a
/// pure function of the input and cannot cycle.
LpSolution solve_simplex(const LinearProgram& lp, const SimplexOptions& options = {});

}  // namespace popkit
