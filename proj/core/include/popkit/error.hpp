#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace popkit {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data or arguments violate a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver stopped before meeting its convergence test.
/// Carries the best iterate seen and its objective value.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::vector<double> best_iterate, double residual)
      : Error(what), best_iterate_(std::move(best_iterate)), residual_(residual) {}

  const std::vector<double>& best_iterate() const noexcept { return best_iterate_; }
  double residual() const noexcept { return residual_; }

 private:
  std::vector<double> best_iterate_;
  double residual_;
};

/// Problem size exceeds a hard cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace popkit
