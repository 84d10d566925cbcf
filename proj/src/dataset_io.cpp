#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "genmean/errors.hpp"
#include "genmean/harness.hpp"
#include "genmean/numeric.hpp"

namespace genmean {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Kind = DatasetError::Kind;

namespace {

struct CsvTable {
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of each row.
  std::vector<std::size_t> lines;
};

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError(Kind::missing_file, path.string(), 0, "cannot open");
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    table.rows.push_back(std::move(cells));
    table.lines.push_back(lineno);
  }
  return table;
}

std::vector<double> read_model_file(const fs::path& path, std::size_t expected_rows, std::size_t classes) {
  const auto table = read_csv(path);
  if (table.rows.size() != expected_rows)
    throw DatasetError(Kind::schema, path.string(), 0,
                       std::to_string(table.rows.size()) + " rows, expected " + std::to_string(expected_rows));
  std::vector<double> probs;
  probs.reserve(expected_rows * classes);
  for (std::size_t n = 0; n < table.rows.size(); ++n) {
    const auto& cells = table.rows[n];
    const auto line = table.lines[n];
    if (cells.size() != classes)
      throw DatasetError(Kind::schema, path.string(), line,
                         std::to_string(cells.size()) + " columns, expected " + std::to_string(classes));
    double sum = 0.0;
    for (const auto& c : cells) {
      double p = 0.0;
      try {
        p = parse_double(c);
      } catch (const InvalidInput&) {
        throw DatasetError(Kind::parse, path.string(), line, "not a number: '" + c + "'");
      }
      if (!(p >= 0.0) || !std::isfinite(p))
        throw DatasetError(Kind::parse, path.string(), line, "probability must be finite and nonnegative");
      probs.push_back(p);
      sum += p;
    }
    if (!(std::abs(sum - 1.0) <= kIngestRowTolerance))
      throw DatasetError(Kind::row_normalization, path.string(), line, "row sums to " + format_exact(sum));
  }
  return probs;
}

std::vector<std::size_t> read_labels(const fs::path& path, std::size_t classes) {
  const auto table = read_csv(path);
  std::vector<std::size_t> labels;
  labels.reserve(table.rows.size());
  for (std::size_t n = 0; n < table.rows.size(); ++n) {
    const auto& cells = table.rows[n];
    const auto line = table.lines[n];
    if (cells.size() != 1) throw DatasetError(Kind::schema, path.string(), line, "expected one label column");
    std::string_view s = cells[0];
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
      throw DatasetError(Kind::parse, path.string(), line, "not an integer label: '" + cells[0] + "'");
    if (v < 0 || static_cast<unsigned long long>(v) >= classes)
      throw DatasetError(Kind::label_range, path.string(), line,
                         "label " + std::to_string(v) + " not in [0, " + std::to_string(classes) + ")");
    labels.push_back(static_cast<std::size_t>(v));
  }
  if (labels.empty()) throw DatasetError(Kind::schema, path.string(), 0, "no labels");
  return labels;
}

template <typename T>
T require(const json& j, const char* key, const fs::path& manifest) {
  if (!j.contains(key)) throw DatasetError(Kind::schema, manifest.string(), 0, std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DatasetError(Kind::schema, manifest.string(), 0, std::string("key '") + key + "' has the wrong type");
  }
}

}  // namespace

std::size_t EnsembleDataset::models() const noexcept {
  if (ensembles.empty() || ensembles.front().samples.empty()) return 0;
  return ensembles.front().samples.front().models();
}

void EnsembleDataset::validate() const {
  if (ensembles.empty()) throw InvalidInput("dataset has no ensembles");
  if (labels.empty()) throw InvalidInput("dataset has no samples");
  if (classes < 2) throw InvalidInput("dataset needs at least two classes");
  const std::size_t k = models();
  for (std::size_t e = 0; e < ensembles.size(); ++e) {
    const auto& s = ensembles[e].samples;
    if (s.size() != labels.size())
      throw InvalidInput("ensemble " + std::to_string(e) + " has " + std::to_string(s.size()) + " samples, expected " +
                         std::to_string(labels.size()));
    for (const auto& m : s)
      if (m.models() != k || m.classes() != classes)
        throw InvalidInput("ensemble " + std::to_string(e) + " has inconsistent shapes");
  }
  for (std::size_t n = 0; n < labels.size(); ++n)
    if (labels[n] >= classes) throw InvalidInput("label out of range at sample " + std::to_string(n));
}

EnsembleDataset load_dataset(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw DatasetError(Kind::missing_file, manifest_path.string(), 0, "cannot open manifest");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DatasetError(Kind::parse, manifest_path.string(), 0, e.what());
  }
  if (!j.is_object()) throw DatasetError(Kind::schema, manifest_path.string(), 0, "manifest must be an object");

  EnsembleDataset ds;
  ds.name = require<std::string>(j, "name", manifest_path);
  if (!j.contains("classes") || !j["classes"].is_number_integer())
    throw DatasetError(Kind::schema, manifest_path.string(), 0, "'classes' must be an integer");
  const auto classes = j["classes"].get<long long>();
  if (classes < 2) throw DatasetError(Kind::schema, manifest_path.string(), 0, "'classes' must be at least 2");
  ds.classes = static_cast<std::size_t>(classes);
  const auto labels_file = require<std::string>(j, "labels", manifest_path);
  const auto files = require<std::vector<std::vector<std::string>>>(j, "ensembles", manifest_path);
  if (files.empty()) throw DatasetError(Kind::schema, manifest_path.string(), 0, "'ensembles' is empty");
  const std::size_t k = files.front().size();
  if (k == 0) throw DatasetError(Kind::schema, manifest_path.string(), 0, "ensemble with no models");
  for (const auto& e : files)
    if (e.size() != k)
      throw DatasetError(Kind::schema, manifest_path.string(), 0, "ensembles list different numbers of models");

  const fs::path base = manifest_path.parent_path();
  ds.labels = read_labels(base / labels_file, ds.classes);
  const std::size_t N = ds.labels.size();
  const std::size_t L = ds.classes;

  for (const auto& e : files) {
    std::vector<std::vector<double>> probs;
    for (const auto& f : e) probs.push_back(read_model_file(base / f, N, L));
    Ensemble ens;
    ens.samples.reserve(N);
    std::vector<double> buf(k * L);
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t y = 0; y < L; ++y) buf[i * L + y] = probs[i][n * L + y];
      ens.samples.push_back(LogProbMatrix::from_probabilities(k, L, buf, kIngestRowTolerance));
    }
    ds.ensembles.push_back(std::move(ens));
    ds.source_probs.push_back(std::move(probs));
  }
  return ds;
}

fs::path save_dataset(const EnsembleDataset& ds, const fs::path& dir) {
  ds.validate();
  fs::create_directories(dir);
  const std::size_t N = ds.samples();
  const std::size_t k = ds.models();
  const std::size_t L = ds.classes;

  {
    std::ofstream out(dir / "labels.csv");
    for (auto y : ds.labels) out << y << '\n';
    if (!out) throw Error("failed to write " + (dir / "labels.csv").string());
  }

  json manifest;
  manifest["name"] = ds.name;
  manifest["classes"] = L;
  manifest["labels"] = "labels.csv";
  json ensembles = json::array();
  for (std::size_t e = 0; e < ds.ensembles.size(); ++e) {
    json files = json::array();
    for (std::size_t i = 0; i < k; ++i) {
      const std::string name = "e" + std::to_string(e) + "_m" + std::to_string(i) + ".csv";
      files.push_back(name);
      const bool have_source = e < ds.source_probs.size() && i < ds.source_probs[e].size();
      std::ofstream out(dir / name);
      for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t y = 0; y < L; ++y) {
          const double p = have_source ? ds.source_probs[e][i][n * L + y] : std::exp(ds.ensembles[e].samples[n](i, y));
          if (y) out << ',';
          out << format_exact(p);
        }
        out << '\n';
      }
      if (!out) throw Error("failed to write " + (dir / name).string());
    }
    ensembles.push_back(std::move(files));
  }
  manifest["ensembles"] = std::move(ensembles);

  const fs::path path = dir / "manifest.json";
  std::ofstream out(path);
  out << manifest.dump(2) << '\n';
  if (!out) throw Error("failed to write " + path.string());
  return path;
}

}  // namespace genmean
