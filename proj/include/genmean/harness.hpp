#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "genmean/discrete.hpp"
#include "genmean/gaussian.hpp"
#include "genmean/power_order.hpp"

namespace genmean {

/// Rows whose probabilities sum further than this from one are rejected on
/// load; anything closer is renormalized exactly.
inline constexpr double kIngestRowTolerance = 1e-4;

struct Ensemble {
  /// samples[n] is the k x L prediction matrix for sample n.
  std::vector<LogProbMatrix> samples;
};

struct EnsembleDataset {
  std::string name;
  std::size_t classes = 0;
  std::vector<std::size_t> labels;
  std::vector<Ensemble> ensembles;

  /// Probabilities exactly as parsed from disk, [ensemble][model] -> N x L
  /// row-major. Empty for generated datasets. Saving writes these back so
  /// that load(save(load(x))) reproduces identical log-probabilities.
  std::vector<std::vector<std::vector<double>>> source_probs;

  std::size_t samples() const noexcept { return labels.size(); }
  std::size_t models() const noexcept;
  std::size_t ensemble_count() const noexcept { return ensembles.size(); }

  /// Throws InvalidInput unless every ensemble shares N, k, L and labels are
  /// in range.
  void validate() const;
};

/// Reads a JSON manifest {"name", "classes", "labels", "ensembles"} with CSV
/// model and label files resolved relative to the manifest directory.
/// Throws DatasetError with file/row coordinates on failure.
EnsembleDataset load_dataset(const std::filesystem::path& manifest_path);

/// Writes manifest.json, labels.csv and e<E>_m<K>.csv into `dir`. Returns
/// the manifest path.
std::filesystem::path save_dataset(const EnsembleDataset& ds, const std::filesystem::path& dir);

struct SweepResult {
  std::vector<PowerOrder> grid;
  std::vector<double> mean_nll;
  /// Spread across ensembles (discrete sweeps) or Monte Carlo standard
  /// error of the NLL estimate (Gaussian sweeps); see std_kind.
  std::vector<double> std_nll;
  double baseline_mean = 0.0;
  double baseline_std = 0.0;
  /// per_ensemble[e][j] is the NLL of ensemble e at grid[j].
  std::vector<std::vector<double>> per_ensemble;
  std::string std_kind = "across_ensembles";
  std::string baseline_kind = "pooled_individual_mean_pm_1std";

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

/// Aggregates every sample of every ensemble at each order and reports
/// cross-entropy statistics. The grid must be strictly increasing.
SweepResult sweep_discrete(const EnsembleDataset& ds, const std::vector<PowerOrder>& grid);

/// Each model's prediction is a Dirichlet draw around a center that puts
/// mass `accuracy` on one class and spreads the rest evenly. The favoured
/// class is the true label with probability `accuracy` and a uniformly drawn
/// wrong label otherwise, independently per model and sample.
struct DirichletJitter {
  /// Concentration around the center; smaller means noisier models.
  double alpha = 10.0;
  double accuracy = 0.6;
};

struct NearConsensus {
  double sigma = 0.05;
  /// Probability mass the base predictor puts on the true class.
  double accuracy = 0.6;
};

using SynthGenerator = std::variant<DirichletJitter, NearConsensus>;

/// Deterministic synthetic ensembles. Labels are uniform over classes.
EnsembleDataset synth_ensemble(const SynthGenerator& generator, std::size_t samples, std::size_t models,
                               std::size_t classes, std::size_t ensembles, std::uint64_t seed);

/// NLL of the order-r aggregate of `experts` on `n_samples` draws from
/// `sample_law` (seeded by cfg.seed), for each order in the grid. The
/// baseline is the per-expert NLL on the same draws. Experts and law must be
/// one-dimensional.
SweepResult sweep_gaussian(const std::vector<GaussianDensity>& experts, const GaussianDensity& sample_law,
                           std::size_t n_samples, const std::vector<PowerOrder>& grid,
                           const IntegrationConfig& cfg);

enum class ResultFormat { csv, json };

/// Lossless: every double is written with the shortest round-trip text,
/// infinite orders as "-inf"/"+inf".
void save_result(const SweepResult& result, const std::filesystem::path& path, ResultFormat format);
std::string serialize_result(const SweepResult& result, ResultFormat format);
SweepResult load_result(const std::filesystem::path& path, ResultFormat format);
SweepResult parse_result(const std::string& text, ResultFormat format);

}  // namespace genmean
