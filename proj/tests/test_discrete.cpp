#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "genmean/discrete.hpp"
#include "genmean/errors.hpp"
#include "genmean/numeric.hpp"
#include "test_support.hpp"

using namespace genmean;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

std::vector<double> probs_of(const AggregatedLogProbs& a) {
  std::vector<double> out;
  for (double x : a.log_probs) out.push_back(std::exp(x));
  return out;
}

/// Aggregation computed in probability space with no log-domain tricks.
std::vector<double> direct_aggregate(const std::vector<double>& probs, std::size_t k, std::size_t L, double r) {
  std::vector<double> scores(L);
  double z = 0.0;
  for (std::size_t y = 0; y < L; ++y) {
    std::vector<double> col;
    for (std::size_t i = 0; i < k; ++i) col.push_back(probs[i * L + y]);
    z += scores[y] = test::direct_power_mean(col, r);
  }
  for (auto& s : scores) s /= z;
  return scores;
}

const std::vector<PowerOrder> kOrders = {PowerOrder::neg_inf(), PowerOrder::finite(-2.0), PowerOrder::finite(-1.0),
                                         PowerOrder::geometric(), PowerOrder::finite(0.5), PowerOrder::arithmetic(),
                                         PowerOrder::finite(2.0), PowerOrder::pos_inf()};

}  // namespace

TEST_SUITE("discrete") {

TEST_CASE("matrix validation") {
  CHECK_THROWS_AS(LogProbMatrix(1, 1, {0.0}), InvalidInput);
  CHECK_THROWS_AS(LogProbMatrix(0, 2, {}), InvalidInput);
  CHECK_THROWS_AS(LogProbMatrix(1, 2, {0.0}), InvalidInput);
  CHECK_THROWS_AS(LogProbMatrix::from_probabilities(1, 2, std::vector<double>{0.5, 0.6}), InvalidInput);
  CHECK_THROWS_AS(LogProbMatrix(1, 2, {std::nan(""), 0.0}), InvalidInput);
  CHECK_THROWS_AS(LogProbMatrix(1, 2, {kInf, 0.0}), InvalidInput);
  const auto m = LogProbMatrix::from_probabilities(1, 2, std::vector<double>{1.0, 0.0});
  CHECK_FALSE(m.strictly_positive());
  CHECK(m(0, 1) == -kInf);
  // Small drift is accepted and removed.
  const auto d = LogProbMatrix::from_probabilities(1, 2, std::vector<double>{0.3 + 4e-7, 0.7});
  CHECK(std::abs(logsumexp(d.row(0))) < 1e-15);
}

TEST_CASE("documented aggregation examples") {
  const auto fx = extreme_counterexamples();
  {
    const auto a = aggregate(fx.min_at_disagreement.models, PowerOrder::neg_inf());
    const auto p = probs_of(a);
    CHECK(p[0] == doctest::Approx(0.0909).epsilon(0.001));
    CHECK(p[1] == doctest::Approx(0.9091).epsilon(0.001));
    CHECK(p[0] == doctest::Approx(1.0 / 11.0).epsilon(1e-13));
  }
  {
    const auto a = aggregate(fx.max_at_agreement.models, PowerOrder::pos_inf());
    const auto p = probs_of(a);
    CHECK(p[0] == doctest::Approx(0.865).epsilon(0.001));
    CHECK(p[1] == doctest::Approx(0.067).epsilon(0.01));
    CHECK(p[2] == doctest::Approx(0.067).epsilon(0.01));
    CHECK(p[0] == doctest::Approx(0.9 / 1.04).epsilon(1e-13));
  }
  const auto same = LogProbMatrix::from_probabilities(2, 2, std::vector<double>{0.2, 0.8, 0.2, 0.8});
  for (const auto& order : kOrders) {
    const auto a = aggregate(same, order);
    CHECK(std::exp(a.log_probs[0]) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(std::abs(a.log_z) < 1e-12);
    CHECK(a.order == order);
  }
  const auto mixed = LogProbMatrix::from_probabilities(2, 2, std::vector<double>{0.9, 0.1, 0.5, 0.5});
  const auto a = aggregate(mixed, PowerOrder::arithmetic());
  CHECK(std::exp(a.log_probs[0]) == doctest::Approx(0.7).epsilon(1e-13));
  CHECK(std::abs(a.log_z) < 1e-15);
}

TEST_CASE("agrees with probability-space aggregation") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + trial % 4, L = 2 + trial % 6;
    const auto probs = test::random_prob_rows(k, L, rng);
    const auto m = LogProbMatrix::from_probabilities(k, L, probs);
    for (double r : {-3.0, -1.0, 0.0, 0.5, 1.0, 3.0}) {
      const auto got = probs_of(aggregate(m, PowerOrder::finite(r)));
      const auto want = direct_aggregate(probs, k, L, r);
      for (std::size_t y = 0; y < L; ++y) CHECK(got[y] == doctest::Approx(want[y]).epsilon(1e-12));
    }
  }
}

TEST_CASE("zero probabilities") {
  const auto m = LogProbMatrix::from_probabilities(2, 3, std::vector<double>{0.5, 0.5, 0.0, 0.2, 0.3, 0.5});
  const auto g = aggregate(m, PowerOrder::geometric());
  CHECK(g.log_probs[2] == -kInf);
  const auto a = aggregate(m, PowerOrder::arithmetic());
  CHECK(std::exp(a.log_probs[2]) == doctest::Approx(0.25));
  CHECK_THROWS_AS(wisdom_gap(m, PowerOrder::geometric()), InvalidInput);

  const auto disjoint = LogProbMatrix::from_probabilities(2, 2, std::vector<double>{1.0, 0.0, 0.0, 1.0});
  CHECK_THROWS_AS(aggregate(disjoint, PowerOrder::geometric()), NumericalError);
  CHECK_NOTHROW(aggregate(disjoint, PowerOrder::finite(0.5)));

  std::vector<AggregatedLogProbs> preds = {g};
  std::vector<std::size_t> labels = {2};
  const auto ce = cross_entropy(preds, labels);
  CHECK(ce.value == kInf);
  CHECK(ce.zero_likelihood_samples == 1);
}

TEST_CASE("wisdom gap examples") {
  const auto fx = extreme_counterexamples();
  for (const auto* c : {&fx.min_at_disagreement, &fx.max_at_agreement}) {
    const auto a = aggregate(c->models, c->order);
    const auto gap = wisdom_gap(c->models, c->order);
    const double agg = a.log_probs[c->true_class];
    double avg = 0.0;
    for (std::size_t i = 0; i < c->models.models(); ++i) avg += c->models(i, c->true_class);
    avg /= static_cast<double>(c->models.models());
    CHECK(agg == doctest::Approx(c->expected_aggregated_loglik).epsilon(0.005));
    CHECK(avg == doctest::Approx(c->expected_average_loglik).epsilon(0.005));
    CHECK(gap.per_class_gap[c->true_class] == doctest::Approx(agg - avg).epsilon(1e-12));
    CHECK(gap.per_class_gap[c->true_class] <= -0.03);
    for (std::size_t y = 0; y < c->expected_probs.size(); ++y)
      CHECK(std::exp(a.log_probs[y]) == doctest::Approx(c->expected_probs[y]).epsilon(0.01));
  }
  CHECK(wisdom_gap(fx.min_at_disagreement.models, PowerOrder::neg_inf()).per_class_gap[0] ==
        doctest::Approx(-0.043).epsilon(0.02));
  CHECK(wisdom_gap(fx.max_at_agreement.models, PowerOrder::pos_inf()).per_class_gap[0] ==
        doctest::Approx(-0.040).epsilon(0.05));

  const auto same = LogProbMatrix::from_probabilities(3, 2, std::vector<double>{0.3, 0.7, 0.3, 0.7, 0.3, 0.7});
  for (const auto& order : kOrders)
    for (double gval : wisdom_gap(same, order).per_class_gap) CHECK(std::abs(gval) < 1e-12);

  std::mt19937_64 rng(32);
  const auto probs = test::random_prob_rows(3, 5, rng);
  const auto m = LogProbMatrix::from_probabilities(3, 5, probs);
  const auto gap = wisdom_gap(m, PowerOrder::finite(0.5));
  const auto direct = direct_aggregate(probs, 3, 5, 0.5);
  for (std::size_t y = 0; y < 5; ++y) {
    double avg = 0.0;
    for (std::size_t i = 0; i < 3; ++i) avg += std::log(probs[i * 5 + y]) / 3.0;
    CHECK(gap.per_class_gap[y] == doctest::Approx(std::log(direct[y]) - avg).epsilon(1e-10));
    CHECK(gap.per_class_gap[y] >= 0.0);
  }
}

TEST_CASE("cross entropy") {
  const auto half = LogProbMatrix::from_probabilities(1, 2, std::vector<double>{0.5, 0.5});
  std::vector<AggregatedLogProbs> preds = {aggregate(half, PowerOrder::arithmetic())};
  std::vector<std::size_t> labels = {0};
  CHECK(cross_entropy(preds, labels).value == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  const double eps = 1e-9;
  const auto sure = LogProbMatrix::from_probabilities(1, 2, std::vector<double>{1.0 - eps, eps});
  preds = {aggregate(sure, PowerOrder::arithmetic())};
  CHECK(cross_entropy(preds, labels).value == doctest::Approx(eps).epsilon(1e-6));

  const auto fx = extreme_counterexamples();
  preds = {aggregate(fx.min_at_disagreement.models, PowerOrder::neg_inf())};
  CHECK(cross_entropy(preds, labels).value == doctest::Approx(2.398).epsilon(1e-3));

  labels = {2};
  CHECK_THROWS_AS(cross_entropy(preds, labels), InvalidInput);
  labels = {0, 1};
  CHECK_THROWS_AS(cross_entropy(preds, labels), InvalidInput);
}

TEST_CASE("individual baseline") {
  const auto fx = extreme_counterexamples();
  std::vector<LogProbMatrix> samples = {fx.min_at_disagreement.models};
  std::vector<std::size_t> labels = {0};
  const auto b = individual_nll_baseline(samples, labels);
  CHECK(b.mean == doctest::Approx(0.5 * (-std::log(0.9) - std::log(0.01))).epsilon(1e-13));
  CHECK(b.mean == doctest::Approx(2.355).epsilon(1e-3));

  const auto rep = LogProbMatrix::from_probabilities(3, 2, std::vector<double>{0.3, 0.7, 0.3, 0.7, 0.3, 0.7});
  samples = {rep};
  labels = {1};
  CHECK(individual_nll_baseline(samples, labels).mean == doctest::Approx(-std::log(0.7)).epsilon(1e-14));

  std::mt19937_64 rng(33);
  std::uniform_int_distribution<std::size_t> lab(0, 3);
  std::vector<std::vector<double>> raw;
  samples.clear();
  labels.clear();
  for (int n = 0; n < 100; ++n) {
    raw.push_back(test::random_prob_rows(3, 4, rng));
    samples.push_back(LogProbMatrix::from_probabilities(3, 4, raw.back()));
    labels.push_back(lab(rng));
  }
  const auto got = individual_nll_baseline(samples, labels);
  double mean = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    double nll = 0.0;
    for (std::size_t n = 0; n < 100; ++n) nll -= std::log(raw[n][i * 4 + labels[n]]);
    nll /= 100.0;
    CHECK(got.per_model[i] == doctest::Approx(nll).epsilon(1e-12));
    mean += nll / 3.0;
  }
  CHECK(got.mean == doctest::Approx(mean).epsilon(1e-12));
  labels.pop_back();
  CHECK_THROWS_AS(individual_nll_baseline(samples, labels), InvalidInput);
}

TEST_CASE("near-consensus perturbation") {
  const std::vector<double> base = {std::log(0.6), std::log(0.25), std::log(0.15)};
  const auto same = near_consensus_perturb(base, 0, 0.0, 4, 7);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t y = 0; y < 3; ++y) CHECK(same(i, y) == doctest::Approx(base[y]).epsilon(1e-15));

  const auto a = near_consensus_perturb(base, 0, 0.1, 5, 42);
  const auto b = near_consensus_perturb(base, 0, 0.1, 5, 42);
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(logsumexp(a.row(i))) < 1e-14);

  CHECK_THROWS_AS(near_consensus_perturb(base, 0, -0.1, 4, 1), InvalidInput);
  CHECK_THROWS_AS(near_consensus_perturb(base, 0, 0.1, 1, 1), InvalidInput);
  CHECK_THROWS_AS(near_consensus_perturb(base, 3, 0.1, 4, 1), InvalidInput);
  const std::vector<double> bad = {std::log(0.6), std::log(0.6)};
  CHECK_THROWS_AS(near_consensus_perturb(bad, 0, 0.1, 4, 1), InvalidInput);
}

TEST_CASE("near-consensus true-class shift matches the lognormal expansion") {
  // After renormalization the true-class log-probability drops by log S with
  // S = p_t + sum_{y != t} p_y exp(sigma Z_y). Second-order expansion:
  // E[log S] ~ log E[S] - Var(S) / (2 E[S]^2).
  const std::vector<double> p = {0.6, 0.25, 0.15};
  const std::vector<double> base = {std::log(p[0]), std::log(p[1]), std::log(p[2])};
  const double sigma = 0.1, s2 = sigma * sigma;
  const double es = p[0] + (1.0 - p[0]) * std::exp(s2 / 2.0);
  const double vs = (p[1] * p[1] + p[2] * p[2]) * (std::exp(2.0 * s2) - std::exp(s2));
  const double expected_shift = -(std::log(es) - vs / (2.0 * es * es));

  const std::size_t draws = 10000;
  const auto m = near_consensus_perturb(base, 0, sigma, draws, 2024);
  std::vector<double> shifts;
  for (std::size_t i = 0; i < draws; ++i) shifts.push_back(m(i, 0) - base[0]);
  const auto ms = mean_std(shifts);
  CHECK(std::abs(ms.mean - expected_shift) < 5.0 * ms.stderr_mean + 1e-5);
  CHECK(std::abs(ms.mean) < sigma);
  for (double s : shifts) CHECK(std::abs(s) < 5.0 * sigma);
}

TEST_CASE("property: aggregates are normalized and Z is bounded") {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 2 + trial % 9, L = 2 + (trial * 7) % 30;
    const auto m = test::random_matrix(k, L, rng, 6.0);
    for (const auto& order : kOrders) {
      const auto a = aggregate(m, order);
      CHECK(std::abs(logsumexp(a.log_probs)) <= 1e-9);
      CHECK(a.log_z <= std::log(static_cast<double>(k)) + 1e-9);
      if (order <= PowerOrder::arithmetic()) CHECK(a.log_z <= 1e-9);
    }
  }
}

TEST_CASE("property: wisdom of crowds holds for orders in [0, 1]") {
  std::mt19937_64 rng(35);
  std::uniform_int_distribution<std::size_t> uk(2, 10), uL(2, 50);
  std::uniform_real_distribution<double> spread(0.5, 8.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto m = test::random_matrix(uk(rng), uL(rng), rng, spread(rng));
    for (int j = 0; j <= 10; ++j) {
      const auto order = PowerOrder::finite(j / 10.0);
      CHECK(wisdom_gap(m, order).min_gap() >= -1e-9);
    }
  }
}

TEST_CASE("property: class scores are monotone in the order") {
  std::mt19937_64 rng(36);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = test::random_matrix(2 + trial % 5, 2 + trial % 7, rng, 4.0);
    std::vector<double> prev;
    for (const auto& order : kOrders) {
      const auto cur = class_scores(m, order);
      if (!prev.empty())
        for (std::size_t y = 0; y < cur.size(); ++y) CHECK(prev[y] <= cur[y] + 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("property: consensus is order independent") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + trial % 6, L = 2 + trial % 9;
    const auto row = test::random_simplex(L, rng, 5.0);
    std::vector<double> probs;
    for (std::size_t i = 0; i < k; ++i) probs.insert(probs.end(), row.begin(), row.end());
    const auto m = LogProbMatrix::from_probabilities(k, L, probs);
    for (const auto& order : kOrders) {
      const auto p = probs_of(aggregate(m, order));
      for (std::size_t y = 0; y < L; ++y) CHECK(std::abs(p[y] - row[y]) <= 1e-12);
    }
  }
}

}
