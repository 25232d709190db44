#include "popkit/moments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "popkit/error.hpp"

namespace popkit {

double binomial_ratio(Count successes, Count trials, Count k) {
  if (successes > trials) throw ValidationError("binomial_ratio: successes > trials");
  if (k > trials) {
    throw ValidationError("binomial_ratio: k = " + std::to_string(k) + " exceeds trials = " +
                          std::to_string(trials));
  }
  if (successes < k) return 0.0;
  double ratio = 1.0;
  for (Count j = 0; j < k; ++j) {
    ratio *= static_cast<double>(successes - j) / static_cast<double>(trials - j);
  }
  return ratio;
}

MomentAccumulator::MomentAccumulator(std::size_t k_max) : count_(k_max, 0), mean_(k_max, 0.0), m2_(k_max, 0.0) {
  if (k_max == 0) throw ValidationError("k_max must be at least 1");
}

void MomentAccumulator::add(const BinomialObservation& obs) {
  validate(obs);
  // Same left-to-right product as binomial_ratio, extended one factor per k.
  double ratio = 1.0;
  const std::size_t limit = std::min<std::size_t>(count_.size(), obs.trials);
  for (std::size_t k = 0; k < limit; ++k) {
    if (ratio != 0.0) {
      ratio = obs.successes > k
                  ? ratio * (static_cast<double>(obs.successes - k) / static_cast<double>(obs.trials - k))
                  : 0.0;
    }
    ++count_[k];
    const double delta = ratio - mean_[k];
    mean_[k] += delta / static_cast<double>(count_[k]);
    m2_[k] += delta * (ratio - mean_[k]);
  }
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.k_max() != k_max()) throw ValidationError("MomentAccumulator::merge: k_max mismatch");
  for (std::size_t k = 0; k < count_.size(); ++k) {
    const std::size_t nb = other.count_[k];
    if (nb == 0) continue;
    const std::size_t na = count_[k];
    const double n = static_cast<double>(na + nb);
    const double delta = other.mean_[k] - mean_[k];
    mean_[k] += delta * static_cast<double>(nb) / n;
    m2_[k] += other.m2_[k] + delta * delta * static_cast<double>(na) * static_cast<double>(nb) / n;
    count_[k] = na + nb;
  }
}

MomentEstimates MomentAccumulator::finish() const {
  MomentEstimates est;
  est.k_max = count_.size();
  est.beta.resize(est.k_max);
  est.sigma_hat.resize(est.k_max);
  est.n_used.resize(est.k_max);
  for (std::size_t k = 0; k < est.k_max; ++k) {
    const std::size_t n = count_[k];
    if (n == 0) {
      throw ValidationError("no record has trials >= " + std::to_string(k + 1) +
                            "; moment " + std::to_string(k + 1) + " cannot be estimated");
    }
    est.n_used[k] = n;
    est.beta[k] = std::clamp(mean_[k], 0.0, 1.0);
    est.sigma_hat[k] = n > 1 ? std::sqrt(m2_[k] / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  }
  return est;
}

MomentEstimates estimate_moments(const BinomialDataset& data, std::size_t k_max) {
  MomentAccumulator acc(k_max);
  for (const auto& obs : data.records()) acc.add(obs);
  return acc.finish();
}

std::size_t default_kmax(const BinomialDataset& data, std::size_t min_entities) {
  if (auto t = data.common_trials()) return static_cast<std::size_t>(*t);
  std::size_t best = 1;
  for (std::size_t k = 1; k <= data.max_trials(); ++k) {
    std::size_t usable = 0;
    for (const auto& r : data.records()) usable += r.trials >= k ? 1 : 0;
    if (usable >= min_entities) best = k;
    else break;
  }
  return best;
}

double concentration_radius(std::size_t n, std::size_t k_max, double delta) {
  if (n == 0) throw ValidationError("concentration_radius: n must be positive");
  if (k_max == 0) throw ValidationError("concentration_radius: k_max must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("concentration_radius: delta must lie in (0,1)");
  return std::sqrt(3.0 * std::log(2.0 * static_cast<double>(k_max) / delta) / static_cast<double>(n));
}

}  // namespace popkit
