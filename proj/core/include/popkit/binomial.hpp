#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace popkit {

using Count = std::uint64_t;

/// One entity's observed coin flips.
struct BinomialObservation {
  Count successes = 0;
  Count trials = 1;

  friend bool operator==(const BinomialObservation&, const BinomialObservation&) = default;
};

/// Validates a single record; throws ValidationError.
void validate(const BinomialObservation& obs);

/// Ordered, non-empty collection of per-entity counts.
///
/// `common_trials()` is set exactly when every record has the same number of
/// trials, which is the setting where the empirical baseline is defined.
class BinomialDataset {
 public:
  explicit BinomialDataset(std::vector<BinomialObservation> records);

  std::span<const BinomialObservation> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  const BinomialObservation& operator[](std::size_t i) const { return records_[i]; }

  std::optional<Count> common_trials() const noexcept { return common_trials_; }
  Count max_trials() const noexcept { return max_trials_; }

  /// Records at the given positions, in the order given.
  BinomialDataset subset(std::span<const std::size_t> positions) const;

 private:
  std::vector<BinomialObservation> records_;
  std::optional<Count> common_trials_;
  Count max_trials_ = 0;
};

}  // namespace popkit
