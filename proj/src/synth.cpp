#include <cmath>
#include <random>

#include "genmean/errors.hpp"
#include "genmean/harness.hpp"
#include "genmean/numeric.hpp"

namespace genmean {

namespace {

// Separate deterministic streams per (purpose, ensemble).
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// log of a Gamma(shape, 1) draw. Small shapes go through
// Gamma(a) = Gamma(a + 1) * U^{1/a} in log space so that tiny draws do not
// underflow to zero.
double log_gamma_draw(double shape, std::mt19937_64& rng) {
  if (shape >= 1.0) return std::log(std::gamma_distribution<double>(shape, 1.0)(rng));
  const double g = std::gamma_distribution<double>(shape + 1.0, 1.0)(rng);
  const double u = 1.0 - std::generate_canonical<double, 53>(rng);  // (0, 1]
  return std::log(g) + std::log(u) / shape;
}

// Log-probabilities of a Dirichlet(concentration) draw.
void log_dirichlet(std::span<const double> concentration, std::span<double> out, std::mt19937_64& rng) {
  for (std::size_t j = 0; j < concentration.size(); ++j) out[j] = log_gamma_draw(concentration[j], rng);
  const double lse = logsumexp(out);
  for (double& x : out) x -= lse;
}

std::vector<std::size_t> draw_labels(std::size_t samples, std::size_t classes, std::uint64_t seed) {
  auto rng = stream(seed, 0, 0);
  std::uniform_int_distribution<std::size_t> pick(0, classes - 1);
  std::vector<std::size_t> labels(samples);
  for (auto& y : labels) y = pick(rng);
  return labels;
}

void check_accuracy(double accuracy) {
  if (!(accuracy > 0.0 && accuracy < 1.0)) throw InvalidInput("accuracy must lie in (0, 1)");
}

EnsembleDataset make(const DirichletJitter& g, std::size_t N, std::size_t k, std::size_t L, std::size_t E,
                     std::uint64_t seed) {
  if (!(g.alpha > 0.0) || !std::isfinite(g.alpha)) throw InvalidInput("alpha must be positive");
  check_accuracy(g.accuracy);
  EnsembleDataset ds;
  ds.name = "dirichlet_jitter";
  ds.classes = L;
  ds.labels = draw_labels(N, L, seed);

  // Each model tilts toward one class with mass `accuracy`; that class is the
  // true one with probability `accuracy`, otherwise a uniformly drawn wrong one.
  const double off = (1.0 - g.accuracy) / static_cast<double>(L - 1);
  std::vector<double> conc(L);
  std::bernoulli_distribution correct(g.accuracy);
  std::uniform_int_distribution<std::size_t> wrong(1, L - 1);
  for (std::size_t e = 0; e < E; ++e) {
    auto rng = stream(seed, 1, e);
    Ensemble ens;
    ens.samples.reserve(N);
    for (std::size_t n = 0; n < N; ++n) {
      const std::size_t t = ds.labels[n];
      std::vector<double> data(k * L);
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t target = correct(rng) ? t : (t + wrong(rng)) % L;
        for (std::size_t y = 0; y < L; ++y) conc[y] = g.alpha * (y == target ? g.accuracy : off);
        log_dirichlet(conc, std::span(data).subspan(i * L, L), rng);
      }
      ens.samples.emplace_back(k, L, std::move(data));
    }
    ds.ensembles.push_back(std::move(ens));
  }
  return ds;
}

EnsembleDataset make(const NearConsensus& g, std::size_t N, std::size_t k, std::size_t L, std::size_t E,
                     std::uint64_t seed) {
  if (!(g.sigma >= 0.0) || !std::isfinite(g.sigma)) throw InvalidInput("sigma must be nonnegative");
  check_accuracy(g.accuracy);
  if (k < 2) throw InvalidInput("near-consensus ensembles need at least two models");
  EnsembleDataset ds;
  ds.name = "near_consensus";
  ds.classes = L;
  ds.labels = draw_labels(N, L, seed);

  // One base predictor per sample shared by every ensemble: mass `accuracy`
  // on the true class, the rest split by a flat Dirichlet.
  auto base_rng = stream(seed, 2, 0);
  const std::vector<double> flat(L - 1, 1.0);
  std::vector<double> rest(L - 1);
  std::vector<std::vector<double>> bases(N, std::vector<double>(L));
  for (std::size_t n = 0; n < N; ++n) {
    log_dirichlet(flat, rest, base_rng);
    const std::size_t t = ds.labels[n];
    for (std::size_t y = 0, j = 0; y < L; ++y)
      bases[n][y] = y == t ? std::log(g.accuracy) : std::log1p(-g.accuracy) + rest[j++];
  }

  for (std::size_t e = 0; e < E; ++e) {
    auto rng = stream(seed, 3, e);
    Ensemble ens;
    ens.samples.reserve(N);
    for (std::size_t n = 0; n < N; ++n)
      ens.samples.push_back(near_consensus_perturb(bases[n], ds.labels[n], g.sigma, k, rng));
    ds.ensembles.push_back(std::move(ens));
  }
  return ds;
}

}  // namespace

EnsembleDataset synth_ensemble(const SynthGenerator& generator, std::size_t samples, std::size_t models,
                               std::size_t classes, std::size_t ensembles, std::uint64_t seed) {
  if (samples < 1 || models < 1 || ensembles < 1) throw InvalidInput("N, k and E must be positive");
  if (classes < 2) throw InvalidInput("need at least two classes");
  auto ds = std::visit([&](const auto& g) { return make(g, samples, models, classes, ensembles, seed); }, generator);
  ds.validate();
  return ds;
}

}  // namespace genmean
