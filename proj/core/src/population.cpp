#include "popkit/population.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "popkit/error.hpp"
#include "popkit/quadrature.hpp"
#include "popkit/rng.hpp"

namespace popkit {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::string short_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

void PopulationSpec::validate() const {
  if (n == 0) throw ValidationError("PopulationSpec: n must be positive");
  if (t == 0) throw ValidationError("PopulationSpec: t must be positive");
  std::visit(Overloaded{
                 [](const TruncatedNormal& k) {
                   if (!(k.sd > 0.0)) throw ValidationError("PopulationSpec: truncated normal sd must be positive");
                   const double accept = normal_cdf((1.0 - k.mean) / k.sd) - normal_cdf(-k.mean / k.sd);
                   if (!(accept > 1e-6)) {
                     throw ValidationError("PopulationSpec: truncated normal puts almost no mass on [0,1]");
                   }
                 },
                 [](const PointMass& k) {
                   if (!(k.value >= 0.0 && k.value <= 1.0)) {
                     throw ValidationError("PopulationSpec: point mass must lie in [0,1]");
                   }
                 },
                 [](const CustomPopulation& k) {
                   if (k.distribution.dim() != 1) {
                     throw ValidationError("PopulationSpec: custom population must be one-dimensional");
                   }
                 },
                 [](const auto&) {},
             },
             kind);
}

std::string PopulationSpec::label() const {
  return std::visit(Overloaded{
                        [](const ThreeSpike&) -> std::string { return "three_spike"; },
                        [](const TruncatedNormal& k) -> std::string {
                          return "truncated_normal(" + short_number(k.mean) + ";" + short_number(k.sd) + ")";
                        },
                        [](const UniformPopulation&) -> std::string { return "uniform"; },
                        [](const PointMass& k) -> std::string { return "point_mass(" + short_number(k.value) + ")"; },
                        [](const CustomPopulation& k) -> std::string {
                          return "custom(" + std::to_string(k.distribution.size()) + ")";
                        },
                    },
                    kind);
}

PopulationSample sample_population(const PopulationSpec& spec) {
  spec.validate();
  Engine engine(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto draw_p = [&]() -> double {
    return std::visit(Overloaded{
                          [&](const ThreeSpike&) {
                            std::uniform_int_distribution<int> pick(1, 3);
                            return 0.25 * pick(engine);
                          },
                          [&](const TruncatedNormal& k) {
                            std::normal_distribution<double> normal(k.mean, k.sd);
                            while (true) {
                              const double v = normal(engine);
                              if (v >= 0.0 && v <= 1.0) return v;
                            }
                          },
                          [&](const UniformPopulation&) { return unit(engine); },
                          [&](const PointMass& k) { return k.value; },
                          [&](const CustomPopulation& k) {
                            const double u = unit(engine);
                            double cumulative = 0.0;
                            for (const Atom& a : k.distribution.atoms()) {
                              cumulative += a.mass;
                              if (u < cumulative) return a.location[0];
                            }
                            return k.distribution.atoms().back().location[0];
                          },
                      },
                      spec.kind);
  };

  std::vector<double> p(spec.n);
  std::vector<BinomialObservation> records(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    p[i] = draw_p();
    std::binomial_distribution<Count> flips(spec.t, p[i]);
    records[i] = BinomialObservation{flips(engine), spec.t};
  }
  return PopulationSample{std::move(p), BinomialDataset(std::move(records))};
}

GriddedDistribution empirical_distribution(const BinomialDataset& data) {
  const auto t = data.common_trials();
  if (!t) throw ValidationError("empirical_distribution: requires a common number of trials");
  std::vector<std::size_t> counts(*t + 1, 0);
  for (const auto& r : data.records()) ++counts[r.successes];
  std::vector<double> masses(*t + 1);
  const auto n = static_cast<double>(data.size());
  for (std::size_t i = 0; i < counts.size(); ++i) masses[i] = static_cast<double>(counts[i]) / n;
  return GriddedDistribution(static_cast<std::size_t>(*t), std::move(masses));
}

PointMassDistribution histogram_of(std::span<const double> p) {
  if (p.empty()) throw ValidationError("histogram_of: no values");
  std::vector<double> sorted(p.begin(), p.end());
  std::sort(sorted.begin(), sorted.end());
  const double unit = 1.0 / static_cast<double>(sorted.size());
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    atoms.push_back(Atom{{sorted[i]}, static_cast<double>(j - i) * unit});
    i = j;
  }
  return PointMassDistribution(std::move(atoms));
}

std::pair<PointMassDistribution, PointMassDistribution> matched_moment_pair(std::size_t t) {
  if (t == 0) throw ValidationError("matched_moment_pair: t must be positive");
  if (t > 30) throw ValidationError("matched_moment_pair: t above 30 is not supported");
  const std::size_t order = (t + 2) / 2;  // ceil((t + 1) / 2)
  const QuadratureRule lower = gauss_legendre(order);
  const QuadratureRule upper = gauss_legendre(order + 1);
  return {PointMassDistribution(lower.nodes, lower.weights), PointMassDistribution(upper.nodes, upper.weights)};
}

std::vector<double> mixture_binomial_pmf(const PointMassDistribution& dist, Count t) {
  if (dist.dim() != 1) throw ValidationError("mixture_binomial_pmf: distribution must be one-dimensional");
  std::vector<double> pmf(t + 1, 0.0);
  for (const Atom& a : dist.atoms()) {
    const double x = a.location[0];
    for (Count k = 0; k <= t; ++k) {
      const double log_choose = std::lgamma(static_cast<double>(t) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
                                std::lgamma(static_cast<double>(t - k) + 1.0);
      pmf[k] += a.mass * std::exp(log_choose) * std::pow(x, static_cast<double>(k)) *
                std::pow(1.0 - x, static_cast<double>(t - k));
    }
  }
  return pmf;
}

}  // namespace popkit
