#include "popkit/binomial.hpp"

#include <algorithm>
#include <string>

#include "popkit/error.hpp"

namespace popkit {

void validate(const BinomialObservation& obs) {
  if (obs.trials == 0) throw ValidationError("observation has zero trials");
  if (obs.successes > obs.trials) {
    throw ValidationError("observation has successes (" + std::to_string(obs.successes) +
                          ") > trials (" + std::to_string(obs.trials) + ")");
  }
}

BinomialDataset::BinomialDataset(std::vector<BinomialObservation> records) : records_(std::move(records)) {
  if (records_.empty()) throw ValidationError("dataset has no records");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    try {
      validate(records_[i]);
    } catch (const ValidationError& e) {
      throw ValidationError("record " + std::to_string(i) + ": " + e.what());
    }
  }
  const Count first = records_.front().trials;
  const bool common = std::all_of(records_.begin(), records_.end(),
                                  [first](const BinomialObservation& r) { return r.trials == first; });
  if (common) common_trials_ = first;
  for (const auto& r : records_) max_trials_ = std::max(max_trials_, r.trials);
}

BinomialDataset BinomialDataset::subset(std::span<const std::size_t> positions) const {
  std::vector<BinomialObservation> out;
  out.reserve(positions.size());
  for (std::size_t p : positions) {
    if (p >= records_.size()) throw ValidationError("subset: position out of range");
    out.push_back(records_[p]);
  }
  return BinomialDataset(std::move(out));
}

}  // namespace popkit
