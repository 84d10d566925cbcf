#include "genmean/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "genmean/errors.hpp"
#include "genmean/numeric.hpp"
#include "genmean/power_mean.hpp"

namespace genmean {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_entries(std::span<const double> logs) {
  for (double x : logs) {
    if (std::isnan(x)) throw InvalidInput("log-probability is NaN");
    if (x == std::numeric_limits<double>::infinity()) throw InvalidInput("log-probability is +inf");
  }
}

}  // namespace

LogProbMatrix::LogProbMatrix(std::size_t models, std::size_t classes, std::vector<double> log_probs,
                             double tolerance)
    : models_(models), classes_(classes), data_(std::move(log_probs)) {
  if (models_ < 1) throw InvalidInput("LogProbMatrix needs at least one model");
  if (classes_ < 2) throw InvalidInput("LogProbMatrix needs at least two classes");
  if (data_.size() != models_ * classes_)
    throw InvalidInput("LogProbMatrix data has " + std::to_string(data_.size()) + " entries, expected " +
                       std::to_string(models_ * classes_));
  check_entries(data_);
  for (std::size_t i = 0; i < models_; ++i) {
    std::span<double> r(data_.data() + i * classes_, classes_);
    const double lse = logsumexp(r);
    if (!(std::abs(lse) <= tolerance))
      throw InvalidInput("row " + std::to_string(i) + " does not sum to one (log-sum " + format_exact(lse) + ")");
    for (double& x : r) x -= lse;
  }
}

LogProbMatrix LogProbMatrix::from_probabilities(std::size_t models, std::size_t classes,
                                                std::span<const double> probs, double tolerance) {
  std::vector<double> logs(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0) || std::isinf(probs[i]))
      throw InvalidInput("probability entry " + std::to_string(i) + " is not a finite nonnegative number");
    logs[i] = std::log(probs[i]);
  }
  return LogProbMatrix(models, classes, std::move(logs), tolerance);
}

bool LogProbMatrix::strictly_positive() const noexcept {
  return std::none_of(data_.begin(), data_.end(), [](double x) { return x == kNegInf; });
}

double WisdomGapReport::min_gap() const {
  if (per_class_gap.empty()) throw PreconditionError("empty wisdom gap report");
  return *std::min_element(per_class_gap.begin(), per_class_gap.end());
}

std::vector<double> class_scores(const LogProbMatrix& models, PowerOrder order) {
  const std::size_t k = models.models();
  const std::size_t L = models.classes();
  std::vector<double> scores(L);
  std::vector<double> column(k);
  for (std::size_t y = 0; y < L; ++y) {
    for (std::size_t i = 0; i < k; ++i) column[i] = models(i, y);
    scores[y] = detail::log_power_mean_inplace(column, order);
  }
  return scores;
}

AggregatedLogProbs aggregate(const LogProbMatrix& models, PowerOrder order) {
  AggregatedLogProbs out;
  out.order = order;
  out.log_probs = class_scores(models, order);
  out.log_z = logsumexp(out.log_probs);
  if (out.log_z == kNegInf)
    throw NumericalError("order " + order.to_string() + " assigns zero score to every class");
  for (double& x : out.log_probs) x -= out.log_z;
  return out;
}

WisdomGapReport wisdom_gap(const LogProbMatrix& models, PowerOrder order) {
  if (!models.strictly_positive()) throw InvalidInput("wisdom gap requires strictly positive probabilities");
  const auto agg = aggregate(models, order);
  const std::size_t k = models.models();
  WisdomGapReport report;
  report.order = order;
  report.per_class_gap.resize(models.classes());
  std::vector<double> column(k);
  for (std::size_t y = 0; y < models.classes(); ++y) {
    for (std::size_t i = 0; i < k; ++i) column[i] = models(i, y);
    std::sort(column.begin(), column.end());
    report.per_class_gap[y] = agg.log_probs[y] - pairwise_sum(column) / static_cast<double>(k);
  }
  return report;
}

CrossEntropy cross_entropy(std::span<const AggregatedLogProbs> predictions,
                           std::span<const std::size_t> labels) {
  if (predictions.size() != labels.size())
    throw InvalidInput("cross_entropy: " + std::to_string(predictions.size()) + " predictions but " +
                       std::to_string(labels.size()) + " labels");
  if (predictions.empty()) throw InvalidInput("cross_entropy: no samples");
  CrossEntropy out;
  std::vector<double> nll(predictions.size());
  for (std::size_t n = 0; n < predictions.size(); ++n) {
    const auto& p = predictions[n].log_probs;
    if (labels[n] >= p.size())
      throw InvalidInput("label " + std::to_string(labels[n]) + " out of range at sample " + std::to_string(n));
    nll[n] = -p[labels[n]];
    if (nll[n] == std::numeric_limits<double>::infinity()) ++out.zero_likelihood_samples;
  }
  out.value = pairwise_sum(nll) / static_cast<double>(nll.size());
  return out;
}

IndividualBaseline individual_nll_baseline(std::span<const LogProbMatrix> samples,
                                           std::span<const std::size_t> labels) {
  if (samples.size() != labels.size())
    throw InvalidInput("individual_nll_baseline: " + std::to_string(samples.size()) + " samples but " +
                       std::to_string(labels.size()) + " labels");
  if (samples.empty()) throw InvalidInput("individual_nll_baseline: no samples");
  const std::size_t k = samples.front().models();
  const std::size_t L = samples.front().classes();
  std::vector<double> nll(samples.size());
  IndividualBaseline out;
  out.per_model.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t n = 0; n < samples.size(); ++n) {
      if (samples[n].models() != k || samples[n].classes() != L)
        throw InvalidInput("individual_nll_baseline: inconsistent shape at sample " + std::to_string(n));
      if (labels[n] >= L)
        throw InvalidInput("label " + std::to_string(labels[n]) + " out of range at sample " + std::to_string(n));
      nll[n] = -samples[n](i, labels[n]);
    }
    out.per_model[i] = pairwise_sum(nll) / static_cast<double>(nll.size());
  }
  out.mean = pairwise_sum(out.per_model) / static_cast<double>(k);
  return out;
}

ExtremeCounterexamples extreme_counterexamples() {
  const std::vector<double> min_probs = {0.9, 0.1, 0.01, 0.99};
  const std::vector<double> max_probs = {0.9, 0.03, 0.07, 0.9, 0.07, 0.03};
  return ExtremeCounterexamples{
      DiscreteCounterexample{"min", LogProbMatrix::from_probabilities(2, 2, min_probs), PowerOrder::neg_inf(), 0,
                             {0.0909, 0.9091}, -2.40, -2.36},
      DiscreteCounterexample{"max", LogProbMatrix::from_probabilities(2, 3, max_probs), PowerOrder::pos_inf(), 0,
                             {0.865, 0.067, 0.067}, -0.145, -0.105},
  };
}

LogProbMatrix near_consensus_perturb(std::span<const double> base_log_probs, std::size_t true_class,
                                     double sigma, std::size_t copies, std::mt19937_64& rng) {
  const std::size_t L = base_log_probs.size();
  if (L < 2) throw InvalidInput("near_consensus_perturb: base needs at least two classes");
  if (true_class >= L) throw InvalidInput("near_consensus_perturb: true class out of range");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidInput("near_consensus_perturb: sigma must be >= 0");
  if (copies < 2) throw InvalidInput("near_consensus_perturb: need at least two copies");
  check_entries(base_log_probs);
  const double base_lse = logsumexp(base_log_probs);
  if (!(std::abs(base_lse) <= kRowLogSumTolerance))
    throw InvalidInput("near_consensus_perturb: base is not a normalized log-distribution");

  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> data(copies * L);
  for (std::size_t i = 0; i < copies; ++i) {
    std::span<double> row(data.data() + i * L, L);
    for (std::size_t y = 0; y < L; ++y) {
      row[y] = base_log_probs[y] - base_lse;
      if (y != true_class && sigma > 0.0) row[y] += sigma * noise(rng);
    }
    const double lse = logsumexp(row);
    for (double& x : row) x -= lse;
  }
  return LogProbMatrix(copies, L, std::move(data));
}

LogProbMatrix near_consensus_perturb(std::span<const double> base_log_probs, std::size_t true_class,
                                     double sigma, std::size_t copies, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return near_consensus_perturb(base_log_probs, true_class, sigma, copies, rng);
}

}  // namespace genmean
