#include <fstream>
#include <json.hpp>
#include <sstream>

#include "genmean/errors.hpp"
#include "genmean/harness.hpp"
#include "genmean/numeric.hpp"

namespace genmean {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const char* const kCsvColumns[] = {"order", "mean_nll", "std_nll", "baseline_mean", "baseline_std"};

json number_to_json(double v) {
  if (std::isfinite(v)) return v;
  return format_exact(v);
}

double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_double(j.get<std::string>());
  throw InvalidInput("expected a number in sweep result");
}

json vector_to_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number_to_json(x));
  return a;
}

std::vector<double> vector_from_json(const json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(number_from_json(x));
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

std::string csv(const SweepResult& r) {
  std::ostringstream out;
  out << "# std_kind=" << r.std_kind << '\n';
  out << "# baseline_kind=" << r.baseline_kind << '\n';
  for (std::size_t c = 0; c < std::size(kCsvColumns); ++c) out << (c ? "," : "") << kCsvColumns[c];
  for (std::size_t e = 0; e < r.per_ensemble.size(); ++e) out << ",ensemble_" << e;
  out << '\n';
  for (std::size_t j = 0; j < r.grid.size(); ++j) {
    out << r.grid[j].to_string() << ',' << format_exact(r.mean_nll[j]) << ',' << format_exact(r.std_nll[j]) << ','
        << format_exact(r.baseline_mean) << ',' << format_exact(r.baseline_std);
    for (const auto& row : r.per_ensemble) out << ',' << format_exact(row[j]);
    out << '\n';
  }
  return out.str();
}

SweepResult from_csv(const std::string& text) {
  SweepResult r;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  std::size_t ensembles = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const auto key = line.substr(2, eq - 2);
      if (key == "std_kind") r.std_kind = line.substr(eq + 1);
      if (key == "baseline_kind") r.baseline_kind = line.substr(eq + 1);
      continue;
    }
    const auto cells = split(line);
    if (!header) {
      if (cells.size() < 5) throw InvalidInput("sweep CSV header is missing columns");
      for (std::size_t c = 0; c < 5; ++c)
        if (cells[c] != kCsvColumns[c]) throw InvalidInput("unexpected sweep CSV column '" + cells[c] + "'");
      ensembles = cells.size() - 5;
      r.per_ensemble.assign(ensembles, {});
      header = true;
      continue;
    }
    if (cells.size() != 5 + ensembles) throw InvalidInput("sweep CSV row has the wrong number of columns");
    r.grid.push_back(PowerOrder::parse(cells[0]));
    r.mean_nll.push_back(parse_double(cells[1]));
    r.std_nll.push_back(parse_double(cells[2]));
    r.baseline_mean = parse_double(cells[3]);
    r.baseline_std = parse_double(cells[4]);
    for (std::size_t e = 0; e < ensembles; ++e) r.per_ensemble[e].push_back(parse_double(cells[5 + e]));
  }
  if (!header) throw InvalidInput("sweep CSV has no header");
  return r;
}

std::string to_json(const SweepResult& r) {
  json j;
  json grid = json::array();
  for (const auto& o : r.grid) grid.push_back(o.is_finite() ? json(o.value()) : json(o.to_string()));
  j["grid"] = std::move(grid);
  j["mean_nll"] = vector_to_json(r.mean_nll);
  j["std_nll"] = vector_to_json(r.std_nll);
  j["baseline_mean"] = number_to_json(r.baseline_mean);
  j["baseline_std"] = number_to_json(r.baseline_std);
  json per = json::array();
  for (const auto& row : r.per_ensemble) per.push_back(vector_to_json(row));
  j["per_ensemble"] = std::move(per);
  j["std_kind"] = r.std_kind;
  j["baseline_kind"] = r.baseline_kind;
  return j.dump(2) + "\n";
}

SweepResult from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
    SweepResult r;
    for (const auto& o : j.at("grid"))
      r.grid.push_back(o.is_number() ? PowerOrder::finite(o.get<double>()) : PowerOrder::parse(o.get<std::string>()));
    r.mean_nll = vector_from_json(j.at("mean_nll"));
    r.std_nll = vector_from_json(j.at("std_nll"));
    r.baseline_mean = number_from_json(j.at("baseline_mean"));
    r.baseline_std = number_from_json(j.at("baseline_std"));
    for (const auto& row : j.at("per_ensemble")) r.per_ensemble.push_back(vector_from_json(row));
    r.std_kind = j.value("std_kind", r.std_kind);
    r.baseline_kind = j.value("baseline_kind", r.baseline_kind);
    return r;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed sweep JSON: ") + e.what());
  }
}

}  // namespace

std::string serialize_result(const SweepResult& result, ResultFormat format) {
  return format == ResultFormat::csv ? csv(result) : to_json(result);
}

SweepResult parse_result(const std::string& text, ResultFormat format) {
  return format == ResultFormat::csv ? from_csv(text) : from_json(text);
}

void save_result(const SweepResult& result, const fs::path& path, ResultFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << serialize_result(result, format);
  if (!out) throw Error("failed to write " + path.string());
}

SweepResult load_result(const fs::path& path, ResultFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_result(ss.str(), format);
}

}  // namespace genmean
