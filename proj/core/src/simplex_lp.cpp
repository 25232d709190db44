#include "popkit/simplex_lp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "popkit/error.hpp"

namespace popkit {

LinearProgram::LinearProgram(std::size_t rows) : rhs_(rows, 0.0) {}

std::size_t LinearProgram::add_variable(double cost, std::span<const Entry> column, double upper) {
  if (!(upper >= 0.0)) throw ValidationError("LinearProgram: upper bound must be nonnegative");
  for (const Entry& e : column) {
    if (e.row >= rhs_.size()) throw ValidationError("LinearProgram: row index out of range");
    if (e.value != 0.0) entries_.push_back(e);
  }
  costs_.push_back(cost);
  upper_.push_back(upper);
  col_start_.push_back(entries_.size());
  return costs_.size() - 1;
}

void LinearProgram::set_rhs(std::size_t row, double value) {
  if (row >= rhs_.size()) throw ValidationError("LinearProgram: row index out of range");
  rhs_[row] = value;
}

std::span<const LinearProgram::Entry> LinearProgram::column(std::size_t j) const {
  return std::span<const Entry>(entries_).subspan(col_start_[j], col_start_[j + 1] - col_start_[j]);
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
constexpr double kInf = std::numeric_limits<double>::infinity();
// Small bases are refactored after every pivot.
constexpr std::size_t kDenseRefactorRows = 64;

enum class VarState : unsigned char { Basic, AtLower, AtUpper };

// Revised simplex over structural columns plus one artificial per row.
// Artificial i has column sign_[i] * e_i.
class SimplexEngine {
 public:
  SimplexEngine(const LinearProgram& lp, const SimplexOptions& opt)
      : lp_(lp), opt_(opt), m_(lp.rows()), n_(lp.columns()),
        sign_(m_, 1.0), upper_(n_ + m_, kInf), x_(n_ + m_, 0.0),
        state_(n_ + m_, VarState::AtLower), basis_(m_), binv_(RowMatrix::Zero(m_, m_)) {
    for (std::size_t j = 0; j < n_; ++j) upper_[j] = lp.upper(j);
    for (std::size_t i = 0; i < m_; ++i) {
      const double b = lp.rhs(i);
      sign_[i] = b >= 0.0 ? 1.0 : -1.0;
      const std::size_t a = n_ + i;
      x_[a] = std::abs(b);
      state_[a] = VarState::Basic;
      basis_[i] = a;
      binv_(i, i) = sign_[i];
    }
  }

  LpSolution run() {
    // Phase 1: drive the artificials to zero.
    std::vector<double> phase1(n_ + m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) phase1[n_ + i] = 1.0;
    LpStatus status = iterate(phase1, true);
    if (status == LpStatus::IterationLimit) return finish(status);
    if (m_ > 0) refactor();
    if (infeasibility() > infeasibility_threshold()) return finish(LpStatus::Infeasible);

    // Phase 2: artificials are pinned at zero.
    for (std::size_t i = 0; i < m_; ++i) {
      upper_[n_ + i] = 0.0;
      if (state_[n_ + i] != VarState::Basic) {
        x_[n_ + i] = 0.0;
        state_[n_ + i] = VarState::AtLower;
      }
    }
    std::vector<double> phase2(n_ + m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) phase2[j] = lp_.cost(j);
    status = iterate(phase2, false);
    if (m_ > 0) refactor();
    return finish(status);
  }

 private:
  template <class F>
  void for_each_entry(std::size_t j, F&& f) const {
    if (j < n_) {
      for (const auto& e : lp_.column(j)) f(e.row, e.value);
    } else {
      f(j - n_, sign_[j - n_]);
    }
  }

  double infeasibility() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < m_; ++i) sum += x_[n_ + i];
    return sum;
  }

  double infeasibility_threshold() const {
    double scale = 1.0;
    for (std::size_t i = 0; i < m_; ++i) scale = std::max(scale, std::abs(lp_.rhs(i)));
    return opt_.feasibility_tol * scale * static_cast<double>(std::max<std::size_t>(m_, 1));
  }

  // With `stop_when_feasible`, the loop ends as soon as the artificials are
  // negligible, which is all the first phase needs.
  LpStatus iterate(const std::vector<double>& cost, bool stop_when_feasible) {
    const std::size_t total = n_ + m_;
    Eigen::VectorXd cb(m_);
    Eigen::VectorXd alpha(m_);
    while (true) {
      if (iterations_ >= opt_.max_iterations) return LpStatus::IterationLimit;
      if (stop_when_feasible && infeasibility() <= 1e-3 * infeasibility_threshold()) return LpStatus::Optimal;

      for (std::size_t i = 0; i < m_; ++i) cb[i] = cost[basis_[i]];
      const Eigen::VectorXd y = binv_.transpose() * cb;

      // Bland: first eligible index enters.
      std::size_t entering = total;
      double direction = 0.0;
      for (std::size_t j = 0; j < total; ++j) {
        if (state_[j] == VarState::Basic || upper_[j] == 0.0) continue;
        // Reduced cost, with a tolerance scaled by the size of its terms.
        double d = cost[j];
        double magnitude = std::abs(cost[j]);
        for_each_entry(j, [&](std::size_t row, double v) {
          d -= y[row] * v;
          magnitude += std::abs(y[row] * v);
        });
        const double tol = opt_.optimality_tol * std::max(1.0, magnitude);
        if (state_[j] == VarState::AtLower && d < -tol) {
          entering = j;
          direction = 1.0;
          break;
        }
        if (state_[j] == VarState::AtUpper && d > tol) {
          entering = j;
          direction = -1.0;
          break;
        }
      }
      if (entering == total) return LpStatus::Optimal;

      alpha.setZero();
      for_each_entry(entering, [&](std::size_t row, double v) { alpha += v * binv_.col(row); });

      // Ratio test; ties go to the smallest variable index.
      double best = upper_[entering];
      std::size_t leave_row = m_;
      bool leave_to_upper = false;
      for (std::size_t i = 0; i < m_; ++i) {
        if (std::abs(alpha[i]) <= opt_.pivot_tol) continue;
        const double delta = -direction * alpha[i];
        const std::size_t var = basis_[i];
        double limit;
        bool to_upper;
        if (delta < 0.0) {
          limit = x_[var] / -delta;
          to_upper = false;
        } else {
          if (upper_[var] == kInf) continue;
          limit = (upper_[var] - x_[var]) / delta;
          to_upper = true;
        }
        limit = std::max(limit, 0.0);
        bool take;
        if (leave_row == m_) {
          take = limit < best;
        } else {
          take = limit < best - 1e-14 || (limit <= best + 1e-14 && var < basis_[leave_row]);
        }
        if (take) {
          best = limit;
          leave_row = i;
          leave_to_upper = to_upper;
        }
      }
      if (best == kInf) return LpStatus::Unbounded;

      for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] -= direction * best * alpha[i];
      x_[entering] += direction * best;
      ++iterations_;

      if (leave_row == m_) {
        // Bound flip; the basis is unchanged.
        state_[entering] = direction > 0.0 ? VarState::AtUpper : VarState::AtLower;
        x_[entering] = direction > 0.0 ? upper_[entering] : 0.0;
        continue;
      }

      const std::size_t leaving = basis_[leave_row];
      state_[leaving] = leave_to_upper ? VarState::AtUpper : VarState::AtLower;
      x_[leaving] = leave_to_upper ? upper_[leaving] : 0.0;
      basis_[leave_row] = entering;
      state_[entering] = VarState::Basic;

      const double pivot = alpha[leave_row];
      binv_.row(leave_row) /= pivot;
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == leave_row || alpha[i] == 0.0) continue;
        binv_.row(i) -= alpha[i] * binv_.row(leave_row);
      }

      if (m_ <= kDenseRefactorRows || iterations_ % opt_.refactor_every == 0) refactor();
    }
  }

  void refactor() {
    RowMatrix basis_matrix = RowMatrix::Zero(m_, m_);
    for (std::size_t i = 0; i < m_; ++i) {
      for_each_entry(basis_[i], [&](std::size_t row, double v) { basis_matrix(row, i) = v; });
    }
    Eigen::PartialPivLU<RowMatrix> lu(basis_matrix);
    binv_ = lu.inverse();

    // Basic values from a backward-stable solve, refined against a residual
    // accumulated in extended precision.
    auto basic_residual = [&]() {
      std::vector<long double> acc(m_);
      for (std::size_t i = 0; i < m_; ++i) acc[i] = lp_.rhs(i);
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (x_[j] == 0.0) continue;
        for_each_entry(j, [&](std::size_t row, double v) {
          acc[row] -= static_cast<long double>(v) * static_cast<long double>(x_[j]);
        });
      }
      Eigen::VectorXd r(m_);
      for (std::size_t i = 0; i < m_; ++i) r[i] = static_cast<double>(acc[i]);
      return r;
    };
    for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] = 0.0;
    Eigen::VectorXd xb = lu.solve(basic_residual());
    for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] = xb[i];
    for (int round = 0; round < 2; ++round) {
      const Eigen::VectorXd correction = lu.solve(basic_residual());
      for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] += correction[i];
    }
  }

  LpSolution finish(LpStatus status) {
    LpSolution sol;
    sol.status = status;
    sol.iterations = iterations_;
    sol.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
    for (std::size_t j = 0; j < n_; ++j) {
      sol.x[j] = std::clamp(sol.x[j], 0.0, upper_[j]);
      sol.objective += lp_.cost(j) * sol.x[j];
    }
    return sol;
  }

  const LinearProgram& lp_;
  SimplexOptions opt_;
  std::size_t m_;
  std::size_t n_;
  std::vector<double> sign_;
  std::vector<double> upper_;
  std::vector<double> x_;
  std::vector<VarState> state_;
  std::vector<std::size_t> basis_;
  RowMatrix binv_;
  std::size_t iterations_ = 0;
};

}  // namespace

LpSolution solve_simplex(const LinearProgram& lp, const SimplexOptions& options) {
  if (options.refactor_every == 0) throw ValidationError("SimplexOptions: refactor_every must be positive");
  SimplexEngine engine(lp, options);
  return engine.run();
}

}  // namespace popkit
