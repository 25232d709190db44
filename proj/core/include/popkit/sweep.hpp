#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "popkit/population.hpp"
#include "popkit/recovery.hpp"

namespace popkit {

struct ExperimentRow {
  std::string kind;
  std::size_t n = 0;
  Count t = 0;
  std::size_t trial = 0;
  double emd_recovered = 0.0;
  double emd_empirical = 0.0;
  double objective = 0.0;
  double wall_time = 0.0;  ///< seconds; 0 unless timing was requested
};

struct SweepFailure {
  std::string kind;
  std::size_t n = 0;
  Count t = 0;
  std::size_t trial = 0;
  std::string message;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;      ///< ordered by (spec, trial)
  std::vector<SweepFailure> failures;   ///< rows whose recovery threw
};

struct SweepOptions {
  std::size_t threads = 1;
  bool record_wall_time = false;
};

/// For every spec and trial: sample with seed derive_seed(spec.seed, trial),
/// estimate and recover with k_max = t on a grid of at least 10 t, and
/// compare both the recovery and the empirical histogram against the
/// sampled p-histogram. `config` supplies the objective, weights and
/// tolerances.
ExperimentReport run_sweep(std::span<const PopulationSpec> specs, const RecoveryConfig& config, std::size_t trials,
                           const SweepOptions& options = {});

/// Header line `kind,n,t,trial,emd_recovered,emd_empirical,objective,wall_time`.
void write_report_csv(const ExperimentReport& report, std::ostream& out);

double median(std::vector<double> values);

}  // namespace popkit
