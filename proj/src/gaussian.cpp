#include "genmean/gaussian.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "genmean/combinatorics.hpp"
#include "genmean/errors.hpp"
#include "genmean/numeric.hpp"
#include "genmean/parallel.hpp"
#include "genmean/power_mean.hpp"

namespace genmean {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

// Half-width of each expert's quadrature window, in standard deviations.
constexpr double kQuadratureHalfWidth = 12.0;
constexpr unsigned kQuadratureMaxDepth = 10;
constexpr std::uint64_t kMonteCarloChunk = std::uint64_t{1} << 14;

Eigen::Index common_dim(std::span<const GaussianDensity> gaussians) {
  if (gaussians.empty()) throw InvalidInput("need at least one Gaussian");
  const auto d = gaussians.front().dim();
  for (const auto& g : gaussians)
    if (g.dim() != d) throw InvalidInput("Gaussians have mixed dimensions");
  return d;
}

void check_point(Eigen::Index d, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != d)
    throw InvalidInput("point has dimension " + std::to_string(x.size()) + ", expected " + std::to_string(d));
}

// log M_{k,r}(x) for the given experts; `scratch` must have k slots.
double log_mean_density(std::span<const GaussianDensity> gaussians, PowerOrder order,
                        const Eigen::Ref<const Eigen::VectorXd>& x, std::vector<double>& scratch) {
  for (std::size_t i = 0; i < gaussians.size(); ++i) scratch[i] = gaussians[i].log_density(x);
  return detail::log_power_mean_inplace(scratch, order);
}

NormalizationResult quadrature_1d(std::span<const GaussianDensity> gaussians, PowerOrder order,
                                  const IntegrationConfig& cfg) {
  const std::size_t k = gaussians.size();
  std::vector<double> mu(k), sd(k), log_norm(k);
  for (std::size_t i = 0; i < k; ++i) {
    mu[i] = gaussians[i].mean()(0);
    sd[i] = gaussians[i].cholesky_lower()(0, 0);
    log_norm[i] = -0.5 * kLog2Pi - std::log(sd[i]);
  }

  std::vector<double> breaks;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < k; ++i) {
    lo = std::min(lo, mu[i] - kQuadratureHalfWidth * sd[i]);
    hi = std::max(hi, mu[i] + kQuadratureHalfWidth * sd[i]);
    for (int j = -static_cast<int>(kQuadratureHalfWidth); j <= static_cast<int>(kQuadratureHalfWidth); ++j)
      breaks.push_back(mu[i] + j * sd[i]);
  }
  // Crossings of two densities are kinks of the min/max integrands.
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double a = 0.5 / (sd[j] * sd[j]) - 0.5 / (sd[i] * sd[i]);
      const double b = mu[i] / (sd[i] * sd[i]) - mu[j] / (sd[j] * sd[j]);
      const double c = 0.5 * mu[j] * mu[j] / (sd[j] * sd[j]) - 0.5 * mu[i] * mu[i] / (sd[i] * sd[i]) +
                       log_norm[i] - log_norm[j];
      // a x^2 + b x + c = 0 where log p_i(x) = log p_j(x).
      if (a == 0.0) {
        if (b != 0.0) breaks.push_back(-c / b);
        continue;
      }
      const double disc = b * b - 4.0 * a * c;
      if (disc < 0.0) continue;
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      if (q != 0.0) breaks.push_back(c / q);
      breaks.push_back(q / a);
    }
  }
  std::erase_if(breaks, [&](double x) { return !(x > lo && x < hi); });
  breaks.push_back(lo);
  breaks.push_back(hi);
  std::sort(breaks.begin(), breaks.end());
  const double min_gap = 1e-12 * std::max(1.0, hi - lo);
  std::vector<double> nodes;
  for (double b : breaks)
    if (nodes.empty() || b - nodes.back() > min_gap) nodes.push_back(b);

  std::vector<double> scratch(k);
  auto log_integrand = [&](double x) {
    for (std::size_t i = 0; i < k; ++i) {
      const double z = (x - mu[i]) / sd[i];
      scratch[i] = log_norm[i] - 0.5 * z * z;
    }
    return detail::log_power_mean_inplace(scratch, order);
  };
  // Integrate exp(log M - shift) so that tiny normalizers do not underflow.
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s + 1 < nodes.size(); ++s)
    for (int j = 0; j <= 8; ++j) shift = std::max(shift, log_integrand(nodes[s] + (nodes[s + 1] - nodes[s]) * j / 8.0));
  if (!std::isfinite(shift)) throw NumericalError("power-mean integrand vanishes on the integration window");
  auto integrand = [&](double x) { return std::exp(log_integrand(x) - shift); };

  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  std::vector<double> pieces(nodes.size() - 1);
  std::vector<double> errors(nodes.size() - 1);
  for (std::size_t s = 0; s + 1 < nodes.size(); ++s) {
    double err = 0.0;
    pieces[s] = GK::integrate(integrand, nodes[s], nodes[s + 1], kQuadratureMaxDepth, 0.1 * cfg.rel_tol, &err);
    errors[s] = err;
  }
  const double z = pairwise_sum(pieces);
  const double abs_err = pairwise_sum(errors);
  if (!(z > 0.0) || !std::isfinite(z)) throw NumericalError("quadrature produced a non-positive normalizer");

  NormalizationResult out;
  out.log_z = std::log(z) + shift;
  out.method = NormalizationMethod::quadrature_1d;
  out.order = order;
  out.error_estimate = abs_err / z;
  if (out.error_estimate > cfg.rel_tol)
    throw AccuracyError("quadrature missed relative tolerance " + format_exact(cfg.rel_tol) + " (estimate " +
                            format_exact(out.error_estimate) + ")",
                        out.log_z, out.error_estimate);
  return out;
}

NormalizationResult importance_sampling(std::span<const GaussianDensity> gaussians, PowerOrder order,
                                        const IntegrationConfig& cfg) {
  const std::size_t k = gaussians.size();
  const auto d = gaussians.front().dim();
  const double log_k = std::log(static_cast<double>(k));
  const std::uint64_t chunks = (cfg.mc_samples + kMonteCarloChunk - 1) / kMonteCarloChunk;

  std::vector<double> sum_w(chunks), sum_w2(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const std::uint64_t begin = c * kMonteCarloChunk;
    const std::uint64_t count = std::min(kMonteCarloChunk, cfg.mc_samples - begin);
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    std::normal_distribution<double> normal;

    std::vector<double> w(count), w2(count), logs(k), scratch(k);
    Eigen::VectorXd z(d), x(d);
    for (std::uint64_t s = 0; s < count; ++s) {
      const auto& comp = gaussians[pick(rng)];
      for (Eigen::Index j = 0; j < d; ++j) z(j) = normal(rng);
      x = comp.mean() + comp.cholesky_lower().triangularView<Eigen::Lower>() * z;
      for (std::size_t i = 0; i < k; ++i) logs[i] = gaussians[i].log_density(x);
      const double log_q = logsumexp(logs) - log_k;
      std::copy(logs.begin(), logs.end(), scratch.begin());
      const double log_m = detail::log_power_mean_inplace(scratch, order);
      w[s] = std::exp(log_m - log_q);
      w2[s] = w[s] * w[s];
    }
    sum_w[c] = pairwise_sum(w);
    sum_w2[c] = pairwise_sum(w2);
  });

  const double n = static_cast<double>(cfg.mc_samples);
  const double zhat = pairwise_sum(sum_w) / n;
  const double var = std::max(0.0, pairwise_sum(sum_w2) / n - zhat * zhat) * n / (n - 1.0);
  const double se = std::sqrt(var / n);
  if (!(zhat > 0.0)) throw NumericalError("importance sampling produced a zero normalizer");

  NormalizationResult out;
  out.log_z = std::log(zhat);
  out.method = NormalizationMethod::monte_carlo;
  out.order = order;
  out.samples = cfg.mc_samples;
  out.seed = cfg.seed;
  out.error_estimate = se / zhat;
  if (out.error_estimate > cfg.mc_rel_tol)
    throw AccuracyError("importance sampling missed relative tolerance " + format_exact(cfg.mc_rel_tol),
                        out.log_z, out.error_estimate);
  return out;
}

}  // namespace

GaussianDensity::GaussianDensity(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : mean_(std::move(mean)), cov_(std::move(covariance)) {
  const auto d = mean_.size();
  if (d < 1) throw InvalidInput("Gaussian dimension must be at least 1");
  if (cov_.rows() != d || cov_.cols() != d) throw InvalidInput("covariance shape does not match the mean");
  if (!mean_.allFinite() || !cov_.allFinite()) throw InvalidInput("Gaussian parameters must be finite");
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::abs(cov_(i, j) - cov_(j, i)) > 1e-12 * std::max(1.0, std::abs(cov_(i, j))))
        throw InvalidInput("covariance is not symmetric");

  Eigen::LLT<Eigen::MatrixXd> llt(cov_);
  if (llt.info() != Eigen::Success) throw InvalidInput("covariance is not positive definite");
  chol_ = llt.matrixL();
  log_det_ = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double pivot = chol_(i, i);
    if (!(pivot > 0.0) || !std::isfinite(pivot)) throw InvalidInput("covariance is not positive definite");
    log_det_ += 2.0 * std::log(pivot);
  }
  precision_ = llt.solve(Eigen::MatrixXd::Identity(d, d));
  precision_ = 0.5 * (precision_ + precision_.transpose());
}

GaussianDensity GaussianDensity::univariate(double mean, double stddev) {
  if (!(stddev > 0.0) || !std::isfinite(stddev)) throw InvalidInput("standard deviation must be positive");
  return GaussianDensity(Eigen::VectorXd::Constant(1, mean), Eigen::MatrixXd::Constant(1, 1, stddev * stddev));
}

double GaussianDensity::log_density(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  check_point(dim(), x);
  const Eigen::VectorXd z = chol_.triangularView<Eigen::Lower>().solve(x - mean_);
  return -0.5 * (static_cast<double>(dim()) * kLog2Pi + log_det_ + z.squaredNorm());
}

double log_density(const GaussianDensity& g, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return g.log_density(x);
}

GaussianDensity GaussianProductForm::implied_gaussian() const {
  Eigen::LLT<Eigen::MatrixXd> llt(precision_sum);
  if (llt.info() != Eigen::Success) throw NumericalError("accumulated precision is not positive definite");
  const auto d = precision_sum.rows();
  Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(d, d));
  cov = 0.5 * (cov + cov.transpose());
  return GaussianDensity(llt.solve(linear), cov);
}

GeometricProduct weighted_geo_product(std::span<const GaussianDensity> gaussians,
                                      std::span<const double> weights) {
  const auto d = common_dim(gaussians);
  if (weights.size() != gaussians.size())
    throw InvalidInput("weights count does not match the number of Gaussians");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("weights must be finite and nonnegative");
  if (std::abs(pairwise_sum(weights) - 1.0) > 1e-12) throw InvalidInput("weights must sum to one");

  GeometricProduct out;
  auto& f = out.form;
  f.weights.assign(weights.begin(), weights.end());
  f.precision_sum = Eigen::MatrixXd::Zero(d, d);
  f.linear = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < gaussians.size(); ++i) {
    const double w = weights[i];
    if (w == 0.0) continue;
    const auto& g = gaussians[i];
    const Eigen::VectorXd pm = g.precision() * g.mean();
    f.precision_sum += w * g.precision();
    f.linear += w * pm;
    f.quad_const += w * g.mean().dot(pm);
    f.log_front += w * (-0.5 * static_cast<double>(d) * kLog2Pi - 0.5 * g.log_det_covariance());
  }

  Eigen::LLT<Eigen::MatrixXd> llt(f.precision_sum);
  if (llt.info() != Eigen::Success) throw NumericalError("accumulated precision is not positive definite");
  const Eigen::MatrixXd lq = llt.matrixL();
  double log_det_q = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(lq(i, i) > 0.0)) throw NumericalError("accumulated precision is not positive definite");
    log_det_q += 2.0 * std::log(lq(i, i));
  }
  const Eigen::VectorXd center = llt.solve(f.linear);

  // c - b^T Q^{-1} b, accumulated as a sum of nonnegative Mahalanobis terms
  // around the product mean to avoid cancellation.
  double residual = 0.0;
  for (std::size_t i = 0; i < gaussians.size(); ++i) {
    if (weights[i] == 0.0) continue;
    const Eigen::VectorXd delta = gaussians[i].mean() - center;
    residual += weights[i] * delta.dot(gaussians[i].precision() * delta);
  }

  out.log_integral = 0.5 * static_cast<double>(d) * kLog2Pi - 0.5 * log_det_q + f.log_front - 0.5 * residual;
  return out;
}

std::string NormalizationResult::method_name() const {
  switch (method) {
    case NormalizationMethod::closed_form_geometric: return "closed_form_geometric";
    case NormalizationMethod::closed_form_reciprocal: return "closed_form_reciprocal(" + std::to_string(reciprocal_n) + ")";
    case NormalizationMethod::quadrature_1d: return "quadrature_1d";
    case NormalizationMethod::monte_carlo:
      return "monte_carlo(" + std::to_string(samples) + "," + std::to_string(seed) + ")";
  }
  return "unknown";
}

void IntegrationConfig::validate() const {
  if (!(rel_tol > 0.0)) throw InvalidInput("rel_tol must be positive");
  if (!(mc_rel_tol > 0.0)) throw InvalidInput("mc_rel_tol must be positive");
  if (mc_samples < (std::uint64_t{1} << 10)) throw InvalidInput("mc_samples must be at least 1024");
}

NormalizationResult log_z_geometric(std::span<const GaussianDensity> gaussians) {
  common_dim(gaussians);
  const std::vector<double> w(gaussians.size(), 1.0 / static_cast<double>(gaussians.size()));
  NormalizationResult out;
  out.log_z = weighted_geo_product(gaussians, w).log_integral;
  out.method = NormalizationMethod::closed_form_geometric;
  out.order = PowerOrder::geometric();
  return out;
}

NormalizationResult log_z_reciprocal(std::span<const GaussianDensity> gaussians, unsigned n,
                                     std::uint64_t composition_cap) {
  common_dim(gaussians);
  if (n < 1) throw InvalidInput("reciprocal order needs n >= 1");
  const auto k = static_cast<unsigned>(gaussians.size());
  const double count = composition_count(n, k);
  if (count > static_cast<double>(composition_cap))
    throw CapacityError("r = 1/" + std::to_string(n) + " with k = " + std::to_string(k) + " needs " +
                            format_exact(count) + " compositions, cap is " + std::to_string(composition_cap),
                        count, static_cast<double>(composition_cap));

  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(count));
  std::vector<double> w(k);
  const double inv_n = 1.0 / static_cast<double>(n);
  for_each_composition(n, k, [&](std::span<const unsigned> parts) {
    for (unsigned i = 0; i < k; ++i) w[i] = parts[i] * inv_n;
    terms.push_back(log_multinomial(parts) + weighted_geo_product(gaussians, w).log_integral);
  });

  NormalizationResult out;
  out.log_z = logsumexp(terms) - static_cast<double>(n) * std::log(static_cast<double>(k));
  out.method = NormalizationMethod::closed_form_reciprocal;
  out.order = PowerOrder::finite(inv_n);
  out.reciprocal_n = n;
  return out;
}

NormalizationResult log_z_numeric(std::span<const GaussianDensity> gaussians, PowerOrder order,
                                  const IntegrationConfig& cfg) {
  const auto d = common_dim(gaussians);
  cfg.validate();
  return d == 1 ? quadrature_1d(gaussians, order, cfg) : importance_sampling(gaussians, order, cfg);
}

unsigned reciprocal_integer(PowerOrder order) {
  if (!order.is_finite()) return 0;
  const double r = order.value();
  if (!(r > 0.0) || r > 1.0) return 0;
  const double n = std::round(1.0 / r);
  if (n > 1e9) return 0;
  const auto ni = static_cast<unsigned>(n);
  return 1.0 / static_cast<double>(ni) == r ? ni : 0;
}

NormalizationResult log_z(std::span<const GaussianDensity> gaussians, PowerOrder order,
                          const IntegrationConfig& cfg) {
  if (order.is_geometric()) return log_z_geometric(gaussians);
  if (const unsigned n = reciprocal_integer(order); n > 0) {
    const double count = composition_count(n, static_cast<unsigned>(gaussians.size()));
    if (count <= static_cast<double>(cfg.composition_cap)) return log_z_reciprocal(gaussians, n, cfg.composition_cap);
  }
  return log_z_numeric(gaussians, order, cfg);
}

double aggregated_log_density(std::span<const GaussianDensity> gaussians, PowerOrder order,
                              const NormalizationResult& norm, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const auto d = common_dim(gaussians);
  check_point(d, x);
  if (!(norm.order == order))
    throw InvalidInput("normalization was computed for order " + norm.order.to_string() + ", not " + order.to_string());
  std::vector<double> scratch(gaussians.size());
  return log_mean_density(gaussians, order, x, scratch) - norm.log_z;
}

double wisdom_gap_continuous(std::span<const GaussianDensity> gaussians, PowerOrder order,
                             const NormalizationResult& norm, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double agg = aggregated_log_density(gaussians, order, norm, x);
  std::vector<double> logs(gaussians.size());
  for (std::size_t i = 0; i < gaussians.size(); ++i) logs[i] = gaussians[i].log_density(x);
  std::sort(logs.begin(), logs.end());
  return agg - pairwise_sum(logs) / static_cast<double>(logs.size());
}

double jensen_gap_continuous(std::span<const GaussianDensity> gaussians, PowerOrder order,
                             const Eigen::Ref<const Eigen::VectorXd>& x) {
  const auto d = common_dim(gaussians);
  check_point(d, x);
  std::vector<double> logs(gaussians.size());
  for (std::size_t i = 0; i < gaussians.size(); ++i) logs[i] = gaussians[i].log_density(x);
  std::vector<double> scratch = logs;
  const double log_m = detail::log_power_mean_inplace(scratch, order);
  std::sort(logs.begin(), logs.end());
  return log_m - pairwise_sum(logs) / static_cast<double>(logs.size());
}

double counterexample_gap_formula(double m, double r) {
  if (!(r < 0.0) || !std::isfinite(r)) throw PreconditionError("counterexample gap formula needs finite r < 0");
  if (!(m > 0.0) || !std::isfinite(m)) throw PreconditionError("counterexample gap formula needs m > 0");
  const double t = -2.0 * r * m * m;
  return (log_add_exp(0.0, t) - std::numbers::ln2) / r + m * m;
}

NllEstimate estimate_nll(std::span<const GaussianDensity> gaussians, PowerOrder order,
                         const NormalizationResult& norm, std::span<const Eigen::VectorXd> samples) {
  if (samples.empty()) throw InvalidInput("estimate_nll needs at least one sample");
  const auto d = common_dim(gaussians);
  if (!(norm.order == order))
    throw InvalidInput("normalization was computed for order " + norm.order.to_string() + ", not " + order.to_string());
  std::vector<double> nll(samples.size());
  std::vector<double> scratch(gaussians.size());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    check_point(d, samples[s]);
    nll[s] = norm.log_z - log_mean_density(gaussians, order, samples[s], scratch);
  }
  const auto ms = mean_std(nll);
  return {ms.mean, ms.stderr_mean};
}

std::vector<Eigen::VectorXd> sample_gaussian(const GaussianDensity& g, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw InvalidInput("sample count must be at least 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  Eigen::VectorXd z(g.dim());
  for (std::size_t s = 0; s < count; ++s) {
    for (Eigen::Index j = 0; j < g.dim(); ++j) z(j) = normal(rng);
    out.emplace_back(g.mean() + g.cholesky_lower().triangularView<Eigen::Lower>() * z);
  }
  return out;
}

}  // namespace genmean
