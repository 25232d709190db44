#include "moment_program.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "popkit/error.hpp"
#include "popkit/simplex_lp.hpp"

namespace popkit::detail {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Weighted design matrix W F and target W b.
struct WeightedLeastSquares {
  RowMatrix a;
  Eigen::VectorXd b;

  explicit WeightedLeastSquares(const MomentProgram& p)
      : a(static_cast<Eigen::Index>(p.rows), static_cast<Eigen::Index>(p.cells)),
        b(static_cast<Eigen::Index>(p.rows)) {
    for (std::size_t r = 0; r < p.rows; ++r) {
      const double w = p.weights[r];
      for (std::size_t c = 0; c < p.cells; ++c) a(r, c) = w * p.feature(r, c);
      b[r] = w * p.targets[r];
    }
  }

  double objective(const Eigen::VectorXd& x) const { return (a * x - b).squaredNorm(); }
};

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void project_in_place(Eigen::VectorXd& v) {
  std::vector<double> tmp = to_std(v);
  project_to_simplex(tmp);
  v = Eigen::Map<const Eigen::VectorXd>(tmp.data(), v.size());
}

// Minimum-norm change d with sum(d) = 0 minimising |A_S (x_S + d) - b|
// over the cells in `support`.
Eigen::VectorXd face_correction(const WeightedLeastSquares& ls, const Eigen::VectorXd& x,
                                const std::vector<Eigen::Index>& support) {
  const auto s = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXd face(ls.a.rows(), s);
  for (Eigen::Index j = 0; j < s; ++j) face.col(j) = ls.a.col(support[static_cast<std::size_t>(j)]);
  const Eigen::VectorXd mean_col = face.rowwise().mean();
  face.colwise() -= mean_col;
  const Eigen::VectorXd residual = ls.b - ls.a * x;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(face);
  Eigen::VectorXd d = cod.solve(residual);
  d.array() -= d.mean();
  return d;
}

// Active-set refinement from a feasible point: exact least squares on the
// current support, stepping to the boundary and releasing cells whenever a
// mass would go negative, then admitting the cell with the most negative
// reduced gradient until the simplex KKT conditions hold.
void refine_active_set(const WeightedLeastSquares& ls, Eigen::VectorXd& x, double& fx) {
  const Eigen::Index cells = x.size();
  std::vector<char> in_support(static_cast<std::size_t>(cells), 0);
  for (Eigen::Index i = 0; i < cells; ++i) in_support[static_cast<std::size_t>(i)] = x[i] > 0.0;

  const std::size_t max_steps = 200 * static_cast<std::size_t>(cells) + 100;
  Eigen::VectorXd current = x;
  for (std::size_t step = 0; step < max_steps; ++step) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < cells; ++i) {
      if (in_support[static_cast<std::size_t>(i)]) support.push_back(i);
    }

    bool on_face_optimum = true;
    if (support.size() > 1) {
      const Eigen::VectorXd d = face_correction(ls, current, support);
      double alpha = 1.0;
      Eigen::Index blocking = -1;
      for (std::size_t j = 0; j < support.size(); ++j) {
        const double dj = d[static_cast<Eigen::Index>(j)];
        if (dj < 0.0) {
          const double limit = current[support[j]] / -dj;
          if (limit < alpha) {
            alpha = limit;
            blocking = support[j];
          }
        }
      }
      for (std::size_t j = 0; j < support.size(); ++j) {
        current[support[j]] = std::max(0.0, current[support[j]] + alpha * d[static_cast<Eigen::Index>(j)]);
      }
      if (blocking >= 0) {
        current[blocking] = 0.0;
        in_support[static_cast<std::size_t>(blocking)] = 0;
        on_face_optimum = false;
      }
      current /= current.sum();
    }
    if (!on_face_optimum) continue;

    // KKT on the simplex: every gradient entry is >= the common value on the
    // support, up to the rounding error of the gradient itself.
    const Eigen::VectorXd residual = ls.a * current - ls.b;
    const Eigen::VectorXd grad = 2.0 * ls.a.transpose() * residual;
    const Eigen::VectorXd grad_noise =
        64.0 * std::numeric_limits<double>::epsilon() * 2.0 * (ls.a.cwiseAbs().transpose() * residual.cwiseAbs());
    double level = 0.0;
    for (Eigen::Index i : support) level += grad[i];
    level /= static_cast<double>(support.size());
    Eigen::Index entering = -1;
    double most_negative = 0.0;
    for (Eigen::Index i = 0; i < cells; ++i) {
      if (in_support[static_cast<std::size_t>(i)]) continue;
      const double reduced = grad[i] - level;
      if (reduced < -grad_noise[i] && reduced < most_negative) {
        most_negative = reduced;
        entering = i;
      }
    }
    if (entering < 0) break;
    in_support[static_cast<std::size_t>(entering)] = 1;
  }

  const double f_current = ls.objective(current);
  if (f_current < fx) {
    x = std::move(current);
    fx = f_current;
  }
}

// Exact minimiser of |A q - b|^2 over the simplex, computed as the point of
// smallest norm in the convex hull of the shifted columns a_i - b by Wolfe's
// algorithm. The corral of active columns stays affinely independent, so
// every affine subproblem is a small, well-posed least-squares solve.
Eigen::VectorXd minimum_norm_point(const WeightedLeastSquares& ls) {
  const Eigen::Index cells = ls.a.cols();
  const Eigen::MatrixXd points = ls.a.colwise() - ls.b;
  double scale = 0.0;
  Eigen::Index start = 0;
  for (Eigen::Index i = 0; i < cells; ++i) {
    const double norm = points.col(i).squaredNorm();
    scale = std::max(scale, norm);
    if (norm < points.col(start).squaredNorm()) start = i;
  }
  const double eps = 1e-15 * std::max(scale, 1e-300);

  std::vector<Eigen::Index> corral{start};
  std::vector<double> weight{1.0};
  Eigen::VectorXd x = points.col(start);

  // Affine minimiser of the corral: coefficients summing to one.
  auto affine_minimiser = [&](std::vector<double>& coef) {
    const std::size_t s = corral.size();
    coef.assign(s, 0.0);
    if (s == 1) {
      coef[0] = 1.0;
      return true;
    }
    const Eigen::VectorXd base = points.col(corral[0]);
    Eigen::MatrixXd d(points.rows(), static_cast<Eigen::Index>(s - 1));
    for (std::size_t j = 1; j < s; ++j) d.col(static_cast<Eigen::Index>(j - 1)) = points.col(corral[j]) - base;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d);
    if (qr.rank() < d.cols()) return false;
    const Eigen::VectorXd beta = qr.solve(-base);
    double rest = 1.0;
    for (std::size_t j = 1; j < s; ++j) {
      coef[j] = beta[static_cast<Eigen::Index>(j - 1)];
      rest -= coef[j];
    }
    coef[0] = rest;
    return true;
  };

  const std::size_t max_major = 10 * static_cast<std::size_t>(cells) + 100;
  std::vector<double> coef;
  for (std::size_t major = 0; major < max_major; ++major) {
    const Eigen::VectorXd inner = points.transpose() * x;
    Eigen::Index entering = 0;
    inner.minCoeff(&entering);
    if (inner[entering] >= x.squaredNorm() - eps) break;
    if (std::find(corral.begin(), corral.end(), entering) != corral.end()) break;
    corral.push_back(entering);
    weight.push_back(0.0);
    const double norm_before = x.squaredNorm();

    bool degenerate = false;
    while (true) {
      if (!affine_minimiser(coef)) {
        degenerate = true;
        break;
      }
      if (std::all_of(coef.begin(), coef.end(), [](double c) { return c > 0.0; })) {
        weight = coef;
        break;
      }
      // Move from the current weights towards the affine minimiser until a
      // weight reaches zero, then drop the vanished points.
      double theta = 1.0;
      for (std::size_t j = 0; j < coef.size(); ++j) {
        if (coef[j] <= 0.0) theta = std::min(theta, weight[j] / (weight[j] - coef[j]));
      }
      for (std::size_t j = 0; j < coef.size(); ++j) weight[j] = theta * coef[j] + (1.0 - theta) * weight[j];
      std::size_t kept = 0;
      double smallest = std::numeric_limits<double>::infinity();
      std::size_t smallest_at = 0;
      for (std::size_t j = 0; j < weight.size(); ++j) {
        if (weight[j] < smallest) {
          smallest = weight[j];
          smallest_at = j;
        }
      }
      for (std::size_t j = 0; j < weight.size(); ++j) {
        if (j == smallest_at || weight[j] <= 0.0) continue;
        corral[kept] = corral[j];
        weight[kept] = weight[j];
        ++kept;
      }
      corral.resize(kept);
      weight.resize(kept);
    }
    if (degenerate) {
      corral.pop_back();
      weight.pop_back();
      break;
    }

    Eigen::VectorXd next = Eigen::VectorXd::Zero(points.rows());
    for (std::size_t j = 0; j < corral.size(); ++j) next += weight[j] * points.col(corral[j]);
    const bool improved = next.squaredNorm() < norm_before;
    x = std::move(next);
    if (!improved) break;
  }

  Eigen::VectorXd q = Eigen::VectorXd::Zero(cells);
  double total = 0.0;
  for (std::size_t j = 0; j < corral.size(); ++j) {
    q[corral[j]] = std::max(weight[j], 0.0);
    total += q[corral[j]];
  }
  return q / total;
}

// Smallest s in [0, 1] with f((1 - s) start + s optimum) <= ceiling, where f
// is the least-squares objective. The objective is a convex quadratic in s
// and f(1) is below the ceiling.
double segment_fraction(const WeightedLeastSquares& ls, const Eigen::VectorXd& start, const Eigen::VectorXd& optimum,
                        double ceiling) {
  const Eigen::VectorXd r0 = ls.a * start - ls.b;
  const Eigen::VectorXd dr = ls.a * (optimum - start);
  const double qa = dr.squaredNorm();
  const double qb = r0.dot(dr);
  const double qc = r0.squaredNorm() - ceiling;
  if (qc <= 0.0) return 0.0;
  if (qa <= 0.0) return 1.0;
  const double disc = std::max(qb * qb - qa * qc, 0.0);
  // Smaller root of qa s^2 + 2 qb s + qc, written to avoid cancellation.
  const double s = qc / (-qb + std::sqrt(disc));
  return std::isfinite(s) ? std::clamp(s, 0.0, 1.0) : 1.0;
}

}  // namespace

void project_to_simplex(std::vector<double>& v) {
  // Sort-based projection onto {x >= 0, sum x = 1}.
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0.0) theta = candidate;
  }
  for (double& x : v) x = std::max(x - theta, 0.0);
}

double program_objective(const MomentProgram& program, const std::vector<double>& masses, bool l1) {
  double total = 0.0;
  for (std::size_t r = 0; r < program.rows; ++r) {
    double fitted = 0.0;
    for (std::size_t c = 0; c < program.cells; ++c) fitted += program.feature(r, c) * masses[c];
    const double d = fitted - program.targets[r];
    total += l1 ? program.weights[r] * std::abs(d) : program.weights[r] * program.weights[r] * d * d;
  }
  return total;
}

ProgramSolution solve_l1(const MomentProgram& program, double tolerance) {
  // Row 0 carries total mass; row r + 1 carries moment r with the split
  // discrepancy (fitted - target) = u_r - v_r.
  LinearProgram lp(program.rows + 1);
  lp.set_rhs(0, 1.0);
  for (std::size_t r = 0; r < program.rows; ++r) lp.set_rhs(r + 1, program.targets[r]);

  std::vector<LinearProgram::Entry> column;
  for (std::size_t c = 0; c < program.cells; ++c) {
    column.clear();
    column.push_back({0, 1.0});
    for (std::size_t r = 0; r < program.rows; ++r) column.push_back({r + 1, program.feature(r, c)});
    lp.add_variable(0.0, column, 1.0);
  }
  for (std::size_t r = 0; r < program.rows; ++r) {
    const LinearProgram::Entry over{r + 1, -1.0};
    const LinearProgram::Entry under{r + 1, 1.0};
    lp.add_variable(program.weights[r], std::span(&over, 1));
    lp.add_variable(program.weights[r], std::span(&under, 1));
  }

  SimplexOptions options;
  options.feasibility_tol = tolerance;
  options.optimality_tol = std::min(options.optimality_tol, tolerance);
  const LpSolution lp_solution = solve_simplex(lp, options);
  if (lp_solution.status != LpStatus::Optimal) {
    std::vector<double> partial(lp_solution.x.begin(),
                                lp_solution.x.begin() + static_cast<std::ptrdiff_t>(program.cells));
    const char* reason = lp_solution.status == LpStatus::Infeasible  ? "infeasible"
                         : lp_solution.status == LpStatus::Unbounded ? "unbounded"
                                                                     : "iteration limit";
    throw SolverError(std::string("linear program did not reach an optimal vertex (") + reason + ")", std::move(partial),
                      lp_solution.objective);
  }

  ProgramSolution sol;
  sol.masses.assign(lp_solution.x.begin(), lp_solution.x.begin() + static_cast<std::ptrdiff_t>(program.cells));
  const double total = std::accumulate(sol.masses.begin(), sol.masses.end(), 0.0);
  for (double& q : sol.masses) q /= total;
  sol.objective = program_objective(program, sol.masses, true);
  sol.iterations = lp_solution.iterations;
  return sol;
}

ProgramSolution solve_l2(const MomentProgram& program, double tolerance, std::size_t max_iters) {
  const WeightedLeastSquares ls(program);
  const auto cells = static_cast<Eigen::Index>(program.cells);

  // Lipschitz constant of the gradient 2 A^T (A x - b).
  const Eigen::MatrixXd gram = ls.a * ls.a.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lipschitz = 2.0 * std::max(eig.eigenvalues().maxCoeff(), 1e-300);
  const double step = 1.0 / lipschitz;

  // Optimal value certified by an exact minimum-norm-point solve.
  Eigen::VectorXd x = Eigen::VectorXd::Constant(cells, 1.0 / static_cast<double>(cells));
  Eigen::VectorXd optimum = minimum_norm_point(ls);
  double optimal_f = ls.objective(optimum);

  // Accelerated projected gradient with gradient-based restart. It stops once
  // within tolerance of the certified optimum, or when a window of
  // iterations recovers only a small fraction of the remaining gap.
  Eigen::VectorXd y = x;
  Eigen::VectorXd ax = ls.a * x;
  Eigen::VectorXd ay = ax;
  double momentum = 1.0;

  Eigen::VectorXd best = x;
  double best_f = ls.objective(x);
  double checkpoint_f = best_f;
  constexpr std::size_t kWindow = 100;
  constexpr double kStallFraction = 1e-5;
  constexpr std::size_t kLookback = 10;
  std::vector<double> history;

  std::size_t iter = 0;
  bool stopped = best_f - optimal_f <= tolerance;
  while (!stopped && iter < max_iters) {
    ++iter;
    const Eigen::VectorXd grad = 2.0 * ls.a.transpose() * (ay - ls.b);
    Eigen::VectorXd next = y - step * grad;
    project_in_place(next);
    const Eigen::VectorXd a_next = ls.a * next;
    const double f_next = (a_next - ls.b).squaredNorm();

    if (f_next < best_f) {
      best_f = f_next;
      best = next;
    }

    if (grad.dot(next - x) > 0.0) {
      momentum = 1.0;
      y = next;
      ay = a_next;
    } else {
      const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      const double beta = (momentum - 1.0) / momentum_next;
      y = next + beta * (next - x);
      ay = a_next + beta * (a_next - ax);
      momentum = momentum_next;
    }
    x = std::move(next);
    ax = a_next;

    if (best_f - optimal_f <= tolerance) stopped = true;
    if (iter % kWindow == 0) {
      const double gap = best_f - optimal_f;
      if (checkpoint_f - best_f < kStallFraction * gap) stopped = true;
      checkpoint_f = best_f;
      // The gain over the last kLookback windows, extrapolated linearly,
      // must be able to close the gap within the remaining budget.
      history.push_back(best_f);
      if (history.size() > kLookback) {
        const double gained = history[history.size() - 1 - kLookback] - best_f;
        const double remaining = static_cast<double>(max_iters - iter) / static_cast<double>(kWindow * kLookback);
        if (gained * remaining < gap - tolerance) stopped = true;
      }
    }
  }

  if (!stopped) {
    throw SolverError("quadratic program did not converge within " + std::to_string(max_iters) + " iterations",
                      to_std(best), best_f);
  }

  // A second certification from the final iterate guards against a poor
  // active-set path from the uniform start.
  Eigen::VectorXd optimum_from_best = best;
  double optimal_from_best_f = best_f;
  refine_active_set(ls, optimum_from_best, optimal_from_best_f);
  if (optimal_from_best_f < optimal_f) {
    optimum = std::move(optimum_from_best);
    optimal_f = optimal_from_best_f;
  }

  // A stalled iterate moves along the segment towards the certified optimum
  // just far enough to come within tolerance of it.
  if (best_f - optimal_f > tolerance) {
    const double ceiling = optimal_f + tolerance;
    const double s = segment_fraction(ls, best, optimum, optimal_f + 0.5 * tolerance);
    Eigen::VectorXd blended = (1.0 - s) * best + s * optimum;
    blended = blended.cwiseMax(0.0);
    blended /= blended.sum();
    const double f_blended = ls.objective(blended);
    if (f_blended <= ceiling) {
      best = std::move(blended);
      best_f = f_blended;
    } else {
      best = std::move(optimum);
      best_f = optimal_f;
    }
  }

  ProgramSolution sol;
  sol.masses = to_std(best);
  sol.objective = program_objective(program, sol.masses, false);
  sol.iterations = iter;
  return sol;
}

}  // namespace popkit::detail
