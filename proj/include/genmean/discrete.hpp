#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "genmean/power_order.hpp"

namespace genmean {

/// Tolerance on |logsumexp(row)| accepted when constructing a LogProbMatrix.
inline constexpr double kRowLogSumTolerance = 1e-6;

/// k x L matrix of log-probabilities: one row per ensemble member, one
/// column per class. Rows are renormalized exactly on construction.
class LogProbMatrix {
 public:
  /// `log_probs` is row-major (model, class). Throws InvalidInput on a
  /// shape mismatch, k < 1, L < 2, NaN or +inf entries, or a row whose
  /// logsumexp is further than `tolerance` from zero.
  LogProbMatrix(std::size_t models, std::size_t classes, std::vector<double> log_probs,
                double tolerance = kRowLogSumTolerance);

  /// Same validation, starting from probabilities (zeros allowed).
  static LogProbMatrix from_probabilities(std::size_t models, std::size_t classes,
                                          std::span<const double> probs,
                                          double tolerance = kRowLogSumTolerance);

  std::size_t models() const noexcept { return models_; }
  std::size_t classes() const noexcept { return classes_; }

  double operator()(std::size_t model, std::size_t cls) const noexcept { return data_[model * classes_ + cls]; }
  std::span<const double> row(std::size_t model) const noexcept {
    return {data_.data() + model * classes_, classes_};
  }
  std::span<const double> data() const noexcept { return data_; }

  /// True when no entry is -inf.
  bool strictly_positive() const noexcept;

 private:
  std::size_t models_;
  std::size_t classes_;
  std::vector<double> data_;
};

struct AggregatedLogProbs {
  std::vector<double> log_probs;
  /// log of the class-sum of the unnormalized power-mean scores.
  double log_z = 0.0;
  PowerOrder order;
};

struct WisdomGapReport {
  /// log pbar(y) - mean_i log p_i(y), per class.
  std::vector<double> per_class_gap;
  PowerOrder order;

  double min_gap() const;
};

/// Unnormalized per-class log M_{k,r}(y).
std::vector<double> class_scores(const LogProbMatrix& models, PowerOrder order);

/// Per-class power mean followed by normalization across classes. Throws
/// NumericalError when every class score is zero (possible for r <= 0 with
/// zero inputs).
AggregatedLogProbs aggregate(const LogProbMatrix& models, PowerOrder order);

/// Requires strictly positive inputs; throws InvalidInput otherwise.
WisdomGapReport wisdom_gap(const LogProbMatrix& models, PowerOrder order);

struct CrossEntropy {
  /// -(1/N) sum_n log p_n(label_n); +inf if any true class has probability 0.
  double value = 0.0;
  std::size_t zero_likelihood_samples = 0;
};

CrossEntropy cross_entropy(std::span<const AggregatedLogProbs> predictions,
                           std::span<const std::size_t> labels);

struct IndividualBaseline {
  double mean = 0.0;
  /// Cross-entropy of each model (row) across all samples.
  std::vector<double> per_model;
};

/// `samples[n]` holds the k model predictions for sample n.
IndividualBaseline individual_nll_baseline(std::span<const LogProbMatrix> samples,
                                           std::span<const std::size_t> labels);

struct DiscreteCounterexample {
  std::string name;
  LogProbMatrix models;
  PowerOrder order;
  std::size_t true_class = 0;
  std::vector<double> expected_probs;
  /// log pbar(true_class), as reported (rounded) for the fixture.
  double expected_aggregated_loglik = 0.0;
  /// mean_i log p_i(true_class), as reported (rounded).
  double expected_average_loglik = 0.0;
};

struct ExtremeCounterexamples {
  /// r = -inf, binary, models disagree on the true class.
  DiscreteCounterexample min_at_disagreement;
  /// r = +inf, three classes, models agree on the true class.
  DiscreteCounterexample max_at_agreement;
};

ExtremeCounterexamples extreme_counterexamples();

/// `copies` perturbed duplicates of `base_log_probs`: every class except
/// `true_class` gets N(0, sigma^2) noise added to its log-probability, then
/// the row is renormalized by subtracting its logsumexp.
LogProbMatrix near_consensus_perturb(std::span<const double> base_log_probs, std::size_t true_class,
                                     double sigma, std::size_t copies, std::uint64_t seed);

LogProbMatrix near_consensus_perturb(std::span<const double> base_log_probs, std::size_t true_class,
                                     double sigma, std::size_t copies, std::mt19937_64& rng);

}  // namespace genmean
