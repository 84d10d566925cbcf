#include "genmean/errors.hpp"
#include "genmean/harness.hpp"
#include "genmean/numeric.hpp"
#include "genmean/parallel.hpp"

namespace genmean {

namespace {

void check_grid(const std::vector<PowerOrder>& grid) {
  if (grid.empty()) throw InvalidInput("order grid is empty");
  if (!is_strictly_increasing(grid)) throw InvalidInput("order grid must be strictly increasing");
}

}  // namespace

SweepResult sweep_discrete(const EnsembleDataset& ds, const std::vector<PowerOrder>& grid) {
  ds.validate();
  check_grid(grid);
  const std::size_t E = ds.ensemble_count();
  const std::size_t G = grid.size();

  SweepResult out;
  out.grid = grid;
  out.per_ensemble.assign(E, std::vector<double>(G));
  parallel_for(E * G, [&](std::size_t task) {
    const std::size_t e = task / G;
    const std::size_t j = task % G;
    const auto& samples = ds.ensembles[e].samples;
    std::vector<AggregatedLogProbs> preds;
    preds.reserve(samples.size());
    for (const auto& m : samples) preds.push_back(aggregate(m, grid[j]));
    out.per_ensemble[e][j] = cross_entropy(preds, ds.labels).value;
  });

  std::vector<double> column(E);
  for (std::size_t j = 0; j < G; ++j) {
    for (std::size_t e = 0; e < E; ++e) column[e] = out.per_ensemble[e][j];
    const auto ms = mean_std(column);
    out.mean_nll.push_back(ms.mean);
    out.std_nll.push_back(ms.stddev);
  }

  std::vector<double> pooled;
  for (const auto& ens : ds.ensembles) {
    const auto base = individual_nll_baseline(ens.samples, ds.labels);
    pooled.insert(pooled.end(), base.per_model.begin(), base.per_model.end());
  }
  const auto ms = mean_std(pooled);
  out.baseline_mean = ms.mean;
  out.baseline_std = ms.stddev;
  return out;
}

SweepResult sweep_gaussian(const std::vector<GaussianDensity>& experts, const GaussianDensity& sample_law,
                           std::size_t n_samples, const std::vector<PowerOrder>& grid,
                           const IntegrationConfig& cfg) {
  if (experts.empty()) throw InvalidInput("need at least one expert");
  if (sample_law.dim() != 1) throw InvalidInput("Gaussian sweeps are one-dimensional");
  for (const auto& g : experts)
    if (g.dim() != sample_law.dim()) throw InvalidInput("expert and sample law dimensions differ");
  if (n_samples < 1) throw InvalidInput("need at least one sample");
  check_grid(grid);
  cfg.validate();

  const auto samples = sample_gaussian(sample_law, n_samples, cfg.seed);
  const std::size_t G = grid.size();

  SweepResult out;
  out.grid = grid;
  out.std_kind = "mc_stderr";
  out.baseline_kind = "individual_mean_pm_1std";
  out.mean_nll.resize(G);
  out.std_nll.resize(G);
  parallel_for(G, [&](std::size_t j) {
    const auto norm = log_z(experts, grid[j], cfg);
    const auto est = estimate_nll(experts, grid[j], norm, samples);
    out.mean_nll[j] = est.nll;
    out.std_nll[j] = est.stderr_nll;
  });
  out.per_ensemble = {out.mean_nll};

  std::vector<double> per_expert(experts.size());
  std::vector<double> nll(samples.size());
  for (std::size_t i = 0; i < experts.size(); ++i) {
    for (std::size_t s = 0; s < samples.size(); ++s) nll[s] = -experts[i].log_density(samples[s]);
    per_expert[i] = pairwise_sum(nll) / static_cast<double>(nll.size());
  }
  const auto ms = mean_std(per_expert);
  out.baseline_mean = ms.mean;
  out.baseline_std = ms.stddev;
  return out;
}

}  // namespace genmean
