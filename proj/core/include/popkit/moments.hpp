#pragma once

#include <cstddef>
#include <vector>

#include "popkit/binomial.hpp"

namespace popkit {

/// C(successes, k) / C(trials, k) as the telescoping product
/// prod_{j<k} (successes - j) / (trials - j). Every factor is <= 1.
/// Throws ValidationError when k > trials or successes > trials.
double binomial_ratio(Count successes, Count trials, Count k);

/// Unbiased estimates of the first k_max moments of the latent parameters.
struct MomentEstimates {
  std::size_t k_max = 0;
  std::vector<double> beta;       ///< beta[k-1] estimates E[p^k]
  std::vector<double> sigma_hat;  ///< estimated standard deviation of beta[k-1]
  std::vector<std::size_t> n_used;  ///< entities with trials >= k
};

/// Streaming accumulator for the per-entity ratio terms. Partial
/// accumulators over disjoint partitions combine with `merge`.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(std::size_t k_max);

  void add(const BinomialObservation& obs);
  void merge(const MomentAccumulator& other);

  std::size_t k_max() const noexcept { return count_.size(); }

  /// Throws ValidationError naming the first k with no usable entity.
  MomentEstimates finish() const;

 private:
  std::vector<std::size_t> count_;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

/// Entities with fewer than k trials are left out of the k-th average.
MomentEstimates estimate_moments(const BinomialDataset& data, std::size_t k_max);

/// common_trials when set, otherwise the largest k with at least
/// `min_entities` records having trials >= k (at least 1).
std::size_t default_kmax(const BinomialDataset& data, std::size_t min_entities = 100);

/// sqrt(3 ln(2 k_max / delta) / n): with probability >= 1 - delta every
/// |beta_k - alpha_k| for k <= k_max is within this radius.
double concentration_radius(std::size_t n, std::size_t k_max, double delta);

}  // namespace popkit
