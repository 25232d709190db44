#include "popkit/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <optional>
#include <ostream>
#include <thread>

#include "popkit/dataset_io.hpp"
#include "popkit/error.hpp"
#include "popkit/moments.hpp"
#include "popkit/rng.hpp"
#include "popkit/transport.hpp"

namespace popkit {

namespace {

struct Job {
  const PopulationSpec* spec;
  std::size_t trial;
};

struct Outcome {
  std::optional<ExperimentRow> row;
  std::optional<SweepFailure> failure;
};

Outcome run_job(const Job& job, const RecoveryConfig& base, bool timed) {
  const PopulationSpec& spec = *job.spec;
  const auto start = std::chrono::steady_clock::now();

  PopulationSpec seeded = spec;
  seeded.seed = derive_seed(spec.seed, job.trial);
  const PopulationSample sample = sample_population(seeded);
  const PointMassDistribution truth = histogram_of(sample.p);
  const double emd_empirical = emd_1d(to_point_masses(empirical_distribution(sample.data)), truth);

  RecoveryConfig config = base;
  config.k_max = static_cast<std::size_t>(spec.t);
  config.grid_size = std::max(base.grid_size, 10 * config.k_max);

  Outcome out;
  try {
    const MomentEstimates est = estimate_moments(sample.data, config.k_max);
    const RecoveryResult rec = recover_detailed(est, config);
    ExperimentRow row;
    row.kind = spec.label();
    row.n = spec.n;
    row.t = spec.t;
    row.trial = job.trial;
    row.emd_recovered = emd_1d(to_point_masses(rec.distribution), truth);
    row.emd_empirical = emd_empirical;
    row.objective = rec.objective;
    if (timed) {
      row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    out.row = std::move(row);
  } catch (const Error& e) {
    out.failure = SweepFailure{spec.label(), spec.n, spec.t, job.trial, e.what()};
  }
  return out;
}

}  // namespace

ExperimentReport run_sweep(std::span<const PopulationSpec> specs, const RecoveryConfig& config, std::size_t trials,
                           const SweepOptions& options) {
  if (trials == 0) throw ValidationError("run_sweep: trials must be positive");
  for (const auto& spec : specs) spec.validate();

  std::vector<Job> jobs;
  for (const auto& spec : specs) {
    for (std::size_t trial = 0; trial < trials; ++trial) jobs.push_back({&spec, trial});
  }
  std::vector<Outcome> outcomes(jobs.size());

  const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, std::max<std::size_t>(jobs.size(), 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) outcomes[i] = run_job(jobs[i], config, options.record_wall_time);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
          outcomes[i] = run_job(jobs[i], config, options.record_wall_time);
        }
      });
    }
  }

  ExperimentReport report;
  for (auto& o : outcomes) {
    if (o.row) report.rows.push_back(std::move(*o.row));
    if (o.failure) report.failures.push_back(std::move(*o.failure));
  }
  return report;
}

void write_report_csv(const ExperimentReport& report, std::ostream& out) {
  out << "kind,n,t,trial,emd_recovered,emd_empirical,objective,wall_time\n";
  for (const auto& r : report.rows) {
    out << r.kind << ',' << r.n << ',' << r.t << ',' << r.trial << ',' << format_number(r.emd_recovered) << ','
        << format_number(r.emd_empirical) << ',' << format_number(r.objective) << ',' << format_number(r.wall_time)
        << '\n';
  }
}

double median(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median: no values");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace popkit
