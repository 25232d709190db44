#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "popkit/bootstrap.hpp"
#include "popkit/dataset_io.hpp"
#include "popkit/error.hpp"
#include "popkit/moments.hpp"
#include "popkit/multivariate.hpp"
#include "popkit/recovery.hpp"
#include "popkit/sweep.hpp"
#include "popkit/transport.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

const std::map<std::string, popkit::Objective> kObjectives{{"l1", popkit::Objective::L1},
                                                             {"l2", popkit::Objective::L2}};
const std::map<std::string, popkit::WeightMode> kWeightModes{{"uniform", popkit::WeightMode::Uniform},
                                                               {"invstd", popkit::WeightMode::InverseStd}};
const std::map<std::string, popkit::GroundMetric> kMetrics{{"l1", popkit::GroundMetric::L1},
                                                            {"l2", popkit::GroundMetric::L2}};

struct SolverFlags {
  popkit::Objective objective = popkit::Objective::L2;
  popkit::WeightMode weights = popkit::WeightMode::InverseStd;
};

void add_solver_flags(CLI::App& cmd, SolverFlags& flags) {
  cmd.add_option("--objective", flags.objective, "Moment discrepancy: l1 or l2")
      ->transform(CLI::CheckedTransformer(kObjectives, CLI::ignore_case));
  cmd.add_option("--weights", flags.weights, "Per-moment weights: uniform or invstd")
      ->transform(CLI::CheckedTransformer(kWeightModes, CLI::ignore_case));
}

// Runs `write` against the named file, or standard output when the path is
// empty or "-".
template <class Writer>
void write_output(const std::string& path, Writer&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    if (!std::cout) throw popkit::IoError("failed writing to standard output");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw popkit::IoError("cannot open '" + path + "' for writing");
  write(out);
  out.flush();
  if (!out) throw popkit::IoError("failed writing '" + path + "'");
}

popkit::RecoveryConfig make_config(std::size_t k_max, std::optional<std::size_t> grid, const SolverFlags& flags) {
  popkit::RecoveryConfig config = popkit::RecoveryConfig::defaults(k_max);
  if (grid) config.grid_size = *grid;
  config.objective = flags.objective;
  config.weight_mode = flags.weights;
  return config;
}

struct MomentsArgs {
  std::string input;
  std::optional<std::size_t> kmax;
  std::string out;
};

int run_moments(const MomentsArgs& args) {
  const popkit::BinomialDataset data = popkit::parse_dataset(std::filesystem::path(args.input));
  const std::size_t k_max = args.kmax.value_or(popkit::default_kmax(data));
  const popkit::MomentEstimates est = popkit::estimate_moments(data, k_max);
  write_output(args.out, [&](std::ostream& os) { popkit::write_moments_json(est, os); });
  return 0;
}

struct RecoverArgs {
  std::string input;
  std::optional<std::size_t> kmax;
  std::optional<std::size_t> grid;
  SolverFlags solver;
  std::optional<std::size_t> bootstrap;
  double fraction = 0.5;
  std::uint64_t seed = 0;
  std::string out;
  std::string cdf;
};

int run_recover(const RecoverArgs& args) {
  const popkit::BinomialDataset data = popkit::parse_dataset(std::filesystem::path(args.input));
  const std::size_t k_max = args.kmax.value_or(popkit::default_kmax(data));
  const popkit::RecoveryConfig config = make_config(k_max, args.grid, args.solver);

  std::optional<popkit::GriddedDistribution> dist;
  if (args.bootstrap) {
    popkit::BootstrapConfig boot;
    boot.replicates = *args.bootstrap;
    boot.fraction = args.fraction;
    boot.seed = args.seed;
    popkit::BootstrapResult result = popkit::bootstrap_recover_detailed(data, config, boot);
    for (const std::string& warning : result.warnings) std::cerr << "warning: " << warning << '\n';
    dist = std::move(result.distribution);
  } else {
    dist = popkit::recover(popkit::estimate_moments(data, k_max), config);
  }

  write_output(args.out, [&](std::ostream& os) { popkit::write_distribution_json(*dist, os); });
  if (!args.cdf.empty()) popkit::emit_distribution(*dist, args.cdf, popkit::DistributionFormat::CsvCdf);
  return 0;
}

struct EmdArgs {
  std::string a;
  std::string b;
  popkit::GroundMetric metric = popkit::GroundMetric::L2;
};

int run_emd(const EmdArgs& args) {
  const popkit::AnyDistribution a = popkit::read_distribution_json(std::filesystem::path(args.a));
  const popkit::AnyDistribution b = popkit::read_distribution_json(std::filesystem::path(args.b));
  double value = 0.0;
  const auto* ga = std::get_if<popkit::GriddedDistribution>(&a);
  const auto* gb = std::get_if<popkit::GriddedDistribution>(&b);
  if (ga && gb) {
    value = popkit::emd_1d(*ga, *gb);
  } else {
    auto points = [](const popkit::AnyDistribution& d) {
      return std::visit([](const auto& dist) { return popkit::to_point_masses(dist); }, d);
    };
    const popkit::PointMassDistribution pa = points(a);
    const popkit::PointMassDistribution pb = points(b);
    if (pa.dim() != pb.dim()) {
      throw popkit::ValidationError("emd: distributions have different dimensions (" + std::to_string(pa.dim()) +
                                    " and " + std::to_string(pb.dim()) + ")");
    }
    value = popkit::emd_transport(pa, pb, args.metric);
  }
  std::cout << popkit::format_number(value) << '\n';
  return 0;
}

struct SweepArgs {
  std::string spec;
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  std::string out;
  SolverFlags solver;
  std::size_t threads = 1;
  bool timing = false;
};

int run_sweep_command(const SweepArgs& args) {
  std::ifstream in(args.spec, std::ios::binary);
  if (!in) throw popkit::IoError("cannot open '" + args.spec + "'");
  const std::vector<popkit::PopulationSpec> specs = popkit::parse_sweep_spec(in, args.seed, args.spec);

  // k_max and the grid are set per row from t; only the solver choices apply.
  const popkit::RecoveryConfig config = make_config(1, std::nullopt, args.solver);
  popkit::SweepOptions options;
  options.threads = args.threads;
  options.record_wall_time = args.timing;
  const popkit::ExperimentReport report = popkit::run_sweep(specs, config, args.trials, options);

  write_output(args.out, [&](std::ostream& os) { popkit::write_report_csv(report, os); });
  for (const popkit::SweepFailure& f : report.failures) {
    std::cerr << "warning: " << f.kind << " n=" << f.n << " t=" << f.t << " trial " << f.trial << ": " << f.message
              << '\n';
  }
  return report.failures.empty() ? 0 : kExitSolver;
}

struct MultiArgs {
  std::string input;
  std::size_t dim = 2;
  std::optional<std::size_t> kmax;
  std::optional<std::size_t> grid;
  SolverFlags solver;
  std::string out;
  std::string cells;
};

int run_recover_multi(const MultiArgs& args) {
  const std::vector<popkit::MultiObservation> data =
      popkit::parse_multi_dataset(std::filesystem::path(args.input), args.dim);
  std::size_t k_max = 0;
  if (args.kmax) {
    k_max = *args.kmax;
  } else {
    // Largest degree every entity supports on every coordinate.
    k_max = std::numeric_limits<std::size_t>::max();
    for (const popkit::MultiObservation& entity : data) {
      for (const popkit::BinomialObservation& obs : entity) k_max = std::min<std::size_t>(k_max, obs.trials);
    }
    if (k_max == 0) throw popkit::ValidationError("recover-multi: some entity has zero trials; pass --kmax");
  }
  const popkit::MultiMomentEstimates moments = popkit::estimate_multi_moments(data, k_max);
  const popkit::RecoveryConfig config = make_config(k_max, std::nullopt, args.solver);
  const std::size_t grid = args.grid.value_or(popkit::default_multi_grid(args.dim));
  const popkit::MultiRecoveryResult result = popkit::recover_multi(moments, config, grid);

  write_output(args.out, [&](std::ostream& os) { popkit::write_distribution_json(result.distribution, os); });
  if (!args.cells.empty()) popkit::emit_distribution(result.distribution, args.cells, popkit::DistributionFormat::CsvCdf);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recover latent success-probability distributions from binomial counts"};
  app.require_subcommand(1);

  MomentsArgs moments;
  CLI::App* moments_cmd = app.add_subcommand("moments", "Estimate the first k moments of the latent probabilities");
  moments_cmd->add_option("--input", moments.input, "Dataset CSV")->required();
  moments_cmd->add_option("--kmax", moments.kmax, "Number of moments")->check(CLI::PositiveNumber);
  moments_cmd->add_option("--out", moments.out, "Output JSON (default: standard output)");

  RecoverArgs recover;
  CLI::App* recover_cmd = app.add_subcommand("recover", "Recover a gridded distribution by moment matching");
  recover_cmd->add_option("--input", recover.input, "Dataset CSV")->required();
  recover_cmd->add_option("--kmax", recover.kmax, "Number of moments")->check(CLI::PositiveNumber);
  recover_cmd->add_option("--grid", recover.grid, "Grid size m (support {0, 1/m, ..., 1})")
      ->check(CLI::PositiveNumber);
  add_solver_flags(*recover_cmd, recover.solver);
  recover_cmd->add_option("--bootstrap", recover.bootstrap, "Average over B random subsamples")
      ->check(CLI::PositiveNumber);
  recover_cmd->add_option("--fraction", recover.fraction, "Subsample fraction in (0, 1]");
  recover_cmd->add_option("--seed", recover.seed, "Random seed");
  recover_cmd->add_option("--out", recover.out, "Output JSON (default: standard output)");
  recover_cmd->add_option("--cdf", recover.cdf, "Also write the CDF as CSV");

  EmdArgs emd;
  CLI::App* emd_cmd = app.add_subcommand("emd", "Earth mover's distance between two distribution files");
  emd_cmd->add_option("--a", emd.a, "First distribution JSON")->required();
  emd_cmd->add_option("--b", emd.b, "Second distribution JSON")->required();
  emd_cmd->add_option("--metric", emd.metric, "Ground metric for multivariate inputs: l1 or l2")
      ->transform(CLI::CheckedTransformer(kMetrics, CLI::ignore_case));

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a synthetic recovery experiment");
  sweep_cmd->add_option("--spec", sweep.spec, "Sweep specification JSON")->required();
  sweep_cmd->add_option("--trials", sweep.trials, "Trials per specification")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seed", sweep.seed, "Master seed");
  sweep_cmd->add_option("--out", sweep.out, "Report CSV (default: standard output)");
  add_solver_flags(*sweep_cmd, sweep.solver);
  sweep_cmd->add_option("--threads", sweep.threads, "Worker threads")->check(CLI::PositiveNumber);
  sweep_cmd->add_flag("--timing", sweep.timing, "Record wall time per row (output is then not reproducible)");

  MultiArgs multi;
  CLI::App* multi_cmd = app.add_subcommand("recover-multi", "Recover a distribution on [0,1]^d");
  multi_cmd->add_option("--input", multi.input, "Dataset CSV with successes_j, trials_j columns")->required();
  multi_cmd->add_option("--dim", multi.dim, "Dimension d")->check(CLI::Range(1, 3));
  multi_cmd->add_option("--kmax", multi.kmax, "Largest total moment degree")->check(CLI::PositiveNumber);
  multi_cmd->add_option("--grid", multi.grid, "Grid size per axis")->check(CLI::PositiveNumber);
  add_solver_flags(*multi_cmd, multi.solver);
  multi_cmd->add_option("--out", multi.out, "Output JSON (default: standard output)");
  multi_cmd->add_option("--cells", multi.cells, "Also write the cell list as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*moments_cmd) return run_moments(moments);
    if (*recover_cmd) return run_recover(recover);
    if (*emd_cmd) return run_emd(emd);
    if (*sweep_cmd) return run_sweep_command(sweep);
    if (*multi_cmd) return run_recover_multi(multi);
  } catch (const popkit::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const popkit::ResourceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const popkit::SolverError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const popkit::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const popkit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}
