#include "popkit/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "popkit/error.hpp"
#include "popkit/rng.hpp"

namespace popkit {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

Count parse_count(const std::string& text, const std::string& column, const std::string& where) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw ValidationError(where + ": column '" + column + "' is not a nonnegative integer: '" + text + "'");
  }
  try {
    return static_cast<Count>(std::stoull(text));
  } catch (const std::exception&) {
    throw ValidationError(where + ": column '" + column + "' is out of range: '" + text + "'");
  }
}

// Header-driven CSV reader; yields (line number, fields) for each data row.
class CsvTable {
 public:
  CsvTable(std::istream& in, std::string source) : source_(std::move(source)) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      if (!have_header) {
        const auto names = split_csv_line(trim(line));
        for (std::size_t i = 0; i < names.size(); ++i) columns_[names[i]] = i;
        width_ = names.size();
        have_header = true;
        continue;
      }
      rows_.push_back({line_no, split_csv_line(trim(line))});
    }
    if (in.bad()) throw IoError(source_ + ": read failed");
    if (!have_header) throw ValidationError(source_ + ": missing header");
    if (rows_.empty()) throw ValidationError(source_ + ": no records");
  }

  std::size_t column(const std::string& name) const {
    const auto it = columns_.find(name);
    if (it == columns_.end()) throw ValidationError(source_ + ": header has no '" + name + "' column");
    return it->second;
  }

  std::optional<std::size_t> optional_column(const std::string& name) const {
    const auto it = columns_.find(name);
    if (it == columns_.end()) return std::nullopt;
    return it->second;
  }

  struct Row {
    std::size_t line;
    std::vector<std::string> fields;
  };

  const std::vector<Row>& rows() const { return rows_; }
  std::string where(const Row& row) const { return source_ + ":" + std::to_string(row.line); }

  void check_width(const Row& row) const {
    if (row.fields.size() != width_) {
      throw ValidationError(where(row) + ": expected " + std::to_string(width_) + " fields, found " +
                            std::to_string(row.fields.size()));
    }
  }

 private:
  std::string source_;
  std::map<std::string, std::size_t> columns_;
  std::size_t width_ = 0;
  std::vector<Row> rows_;
};

BinomialObservation read_observation(const CsvTable& table, const CsvTable::Row& row, std::size_t s_col,
                                     std::size_t t_col, const std::string& entity) {
  const std::string where = table.where(row);
  const BinomialObservation obs{parse_count(row.fields[s_col], "successes", where),
                                parse_count(row.fields[t_col], "trials", where)};
  if (obs.trials == 0) throw ValidationError(where + ": entity '" + entity + "' has zero trials");
  if (obs.successes > obs.trials) {
    throw ValidationError(where + ": entity '" + entity + "' has successes " + std::to_string(obs.successes) +
                          " > trials " + std::to_string(obs.trials));
  }
  return obs;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  writer(out);
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

json number_array(std::span<const double> values) {
  json arr = json::array();
  for (double v : values) arr.push_back(v);
  return arr;
}

std::vector<double> read_masses(const json& doc, const std::string& source) {
  if (!doc.contains("masses") || !doc["masses"].is_array()) {
    throw ValidationError(source + ": missing 'masses' array");
  }
  std::vector<double> masses;
  for (const auto& v : doc["masses"]) {
    if (!v.is_number()) throw ValidationError(source + ": non-numeric mass");
    masses.push_back(v.get<double>());
  }
  return masses;
}

std::size_t read_positive(const json& doc, const char* key, const std::string& source) {
  if (!doc.contains(key) || !doc[key].is_number_integer() || doc[key].get<long long>() <= 0) {
    throw ValidationError(source + ": '" + key + "' must be a positive integer");
  }
  return doc[key].get<std::size_t>();
}

double param(const json& params, const char* key, double fallback, const std::string& where) {
  if (!params.contains(key)) return fallback;
  if (!params[key].is_number()) throw ValidationError(where + ": parameter '" + key + "' must be a number");
  return params[key].get<double>();
}

}  // namespace

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

BinomialDataset parse_dataset(std::istream& in, const std::string& source) {
  const CsvTable table(in, source);
  const std::size_t s_col = table.column("successes");
  const std::size_t t_col = table.column("trials");
  const auto id_col = table.optional_column("entity_id");
  std::vector<BinomialObservation> records;
  records.reserve(table.rows().size());
  for (const auto& row : table.rows()) {
    table.check_width(row);
    const std::string entity = id_col ? row.fields[*id_col] : std::to_string(records.size());
    records.push_back(read_observation(table, row, s_col, t_col, entity));
  }
  return BinomialDataset(std::move(records));
}

BinomialDataset parse_dataset(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_dataset(in, path.string());
}

std::vector<MultiObservation> parse_multi_dataset(std::istream& in, std::size_t dim, const std::string& source) {
  if (dim == 0) throw ValidationError("parse_multi_dataset: dim must be positive");
  const CsvTable table(in, source);
  std::vector<std::pair<std::size_t, std::size_t>> cols;
  for (std::size_t j = 1; j <= dim; ++j) {
    cols.emplace_back(table.column("successes_" + std::to_string(j)), table.column("trials_" + std::to_string(j)));
  }
  const auto id_col = table.optional_column("entity_id");
  std::vector<MultiObservation> out;
  out.reserve(table.rows().size());
  for (const auto& row : table.rows()) {
    table.check_width(row);
    const std::string entity = id_col ? row.fields[*id_col] : std::to_string(out.size());
    MultiObservation obs;
    for (const auto& [s_col, t_col] : cols) obs.push_back(read_observation(table, row, s_col, t_col, entity));
    out.push_back(std::move(obs));
  }
  return out;
}

std::vector<MultiObservation> parse_multi_dataset(const std::filesystem::path& path, std::size_t dim) {
  auto in = open_input(path);
  return parse_multi_dataset(in, dim, path.string());
}

void write_distribution_json(const GriddedDistribution& dist, std::ostream& out) {
  json doc;
  doc["grid_size"] = dist.grid_size();
  doc["masses"] = number_array(dist.masses());
  out << doc.dump() << '\n';
}

void write_distribution_cdf(const GriddedDistribution& dist, std::ostream& out) {
  out << "x,cdf\n";
  const auto q = dist.masses();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    cumulative += q[i];
    if (i + 1 == q.size()) cumulative = 1.0;
    out << format_number(dist.location(i)) << ',' << format_number(cumulative) << '\n';
  }
}

void write_distribution_json(const MultiGriddedDistribution& dist, std::ostream& out) {
  json doc;
  doc["dim"] = dist.dim();
  doc["grid_size"] = dist.grid_size();
  doc["masses"] = number_array(dist.masses());
  out << doc.dump() << '\n';
}

void write_distribution_cells(const MultiGriddedDistribution& dist, std::ostream& out) {
  for (std::size_t j = 1; j <= dist.dim(); ++j) out << 'x' << j << ',';
  out << "mass\n";
  const auto m = static_cast<double>(dist.grid_size());
  for (std::size_t c = 0; c < dist.cells(); ++c) {
    for (std::size_t i : dist.cell_coordinates(c)) out << format_number(static_cast<double>(i) / m) << ',';
    out << format_number(dist.masses()[c]) << '\n';
  }
}

void emit_distribution(const GriddedDistribution& dist, const std::filesystem::path& path, DistributionFormat format) {
  write_file(path, [&](std::ostream& out) {
    if (format == DistributionFormat::Json) write_distribution_json(dist, out);
    else write_distribution_cdf(dist, out);
  });
}

void emit_distribution(const MultiGriddedDistribution& dist, const std::filesystem::path& path,
                       DistributionFormat format) {
  write_file(path, [&](std::ostream& out) {
    if (format == DistributionFormat::Json) write_distribution_json(dist, out);
    else write_distribution_cells(dist, out);
  });
}

AnyDistribution read_distribution_json(std::istream& in, const std::string& source) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(source + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) throw ValidationError(source + ": expected a JSON object");
  const std::size_t grid = read_positive(doc, "grid_size", source);
  std::vector<double> masses = read_masses(doc, source);
  try {
    if (doc.contains("dim")) {
      return MultiGriddedDistribution(read_positive(doc, "dim", source), grid, std::move(masses));
    }
    return GriddedDistribution(grid, std::move(masses));
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  }
}

AnyDistribution read_distribution_json(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_distribution_json(in, path.string());
}

void write_moments_json(const MomentEstimates& est, std::ostream& out) {
  json doc;
  doc["k_max"] = est.k_max;
  doc["beta"] = number_array(est.beta);
  doc["sigma_hat"] = number_array(est.sigma_hat);
  doc["n_used"] = est.n_used;
  out << doc.dump() << '\n';
}

std::vector<PopulationSpec> parse_sweep_spec(std::istream& in, std::uint64_t master_seed, const std::string& source) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(source + ": invalid JSON: " + e.what());
  }
  if (!doc.is_array() || doc.empty()) throw ValidationError(source + ": expected a non-empty JSON array");

  std::vector<PopulationSpec> specs;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& entry = doc[i];
    const std::string where = source + "[" + std::to_string(i) + "]";
    if (!entry.is_object() || !entry.contains("kind") || !entry["kind"].is_string()) {
      throw ValidationError(where + ": entry needs a string 'kind'");
    }
    const std::string kind = entry["kind"].get<std::string>();
    const json params = entry.value("params", json::object());
    if (!params.is_object()) throw ValidationError(where + ": 'params' must be an object");

    PopulationSpec spec;
    if (kind == "three_spike") {
      spec.kind = ThreeSpike{};
    } else if (kind == "truncated_normal") {
      spec.kind = TruncatedNormal{param(params, "mean", 0.5, where), param(params, "sd", 0.15, where)};
    } else if (kind == "uniform") {
      spec.kind = UniformPopulation{};
    } else if (kind == "point_mass") {
      spec.kind = PointMass{param(params, "value", 0.5, where)};
    } else if (kind == "custom") {
      if (!params.contains("atoms") || !params["atoms"].is_array()) {
        throw ValidationError(where + ": custom population needs 'atoms': [[location, mass], ...]");
      }
      std::vector<double> locations;
      std::vector<double> masses;
      for (const auto& atom : params["atoms"]) {
        if (!atom.is_array() || atom.size() != 2 || !atom[0].is_number() || !atom[1].is_number()) {
          throw ValidationError(where + ": each atom must be [location, mass]");
        }
        locations.push_back(atom[0].get<double>());
        masses.push_back(atom[1].get<double>());
      }
      try {
        spec.kind = CustomPopulation{PointMassDistribution(locations, masses)};
      } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
      }
    } else {
      throw ValidationError(where + ": unknown kind '" + kind + "'");
    }
    spec.n = read_positive(entry, "n", where);
    spec.t = read_positive(entry, "t", where);
    if (entry.contains("seed")) {
      if (!entry["seed"].is_number_unsigned()) throw ValidationError(where + ": 'seed' must be a nonnegative integer");
      spec.seed = entry["seed"].get<std::uint64_t>();
    } else {
      spec.seed = derive_seed(master_seed, i);
    }
    try {
      spec.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

}  // namespace popkit
