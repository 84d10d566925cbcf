#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "genmean/power_order.hpp"

namespace genmean {

/// Multivariate normal N(mean, covariance) with its Cholesky factor cached.
class GaussianDensity {
 public:
  /// Throws InvalidInput on shape mismatch, non-finite entries, or a
  /// covariance that is not symmetric (1e-12) or not positive definite.
  /// No jitter is ever added.
  GaussianDensity(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

  static GaussianDensity univariate(double mean, double stddev);

  Eigen::Index dim() const noexcept { return mean_.size(); }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& covariance() const noexcept { return cov_; }
  /// Lower-triangular L with L L^T = covariance.
  const Eigen::MatrixXd& cholesky_lower() const noexcept { return chol_; }
  const Eigen::MatrixXd& precision() const noexcept { return precision_; }
  double log_det_covariance() const noexcept { return log_det_; }

  double log_density(const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;
  Eigen::MatrixXd precision_;
  double log_det_ = 0.0;
};

/// Throws InvalidInput on a dimension mismatch.
double log_density(const GaussianDensity& g, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Intermediate quantities of prod_i p_i(x)^{w_i} written as
/// exp(log_front) * exp(-1/2 (x^T Q x - 2 b^T x + c)).
struct GaussianProductForm {
  Eigen::MatrixXd precision_sum;  // Q = sum w_i Sigma_i^{-1}
  Eigen::VectorXd linear;         // b = sum w_i Sigma_i^{-1} mu_i
  double quad_const = 0.0;        // c = sum w_i mu_i^T Sigma_i^{-1} mu_i
  double log_front = 0.0;         // sum w_i (-(d/2) log 2pi - 1/2 log|Sigma_i|)
  std::vector<double> weights;

  /// The normalized product is N(Q^{-1} b, Q^{-1}).
  GaussianDensity implied_gaussian() const;
};

struct GeometricProduct {
  GaussianProductForm form;
  /// log of the integral of prod_i p_i^{w_i}.
  double log_integral = 0.0;
};

/// Weighted geometric product of Gaussians by completing the square.
/// Throws InvalidInput for weights off the simplex or mixed dimensions and
/// NumericalError when the accumulated precision is not positive definite.
GeometricProduct weighted_geo_product(std::span<const GaussianDensity> gaussians,
                                      std::span<const double> weights);

enum class NormalizationMethod { closed_form_geometric, closed_form_reciprocal, quadrature_1d, monte_carlo };

struct NormalizationResult {
  double log_z = 0.0;
  NormalizationMethod method = NormalizationMethod::closed_form_geometric;
  /// Order this constant was computed for.
  PowerOrder order;
  /// n for closed_form_reciprocal (order = 1/n).
  unsigned reciprocal_n = 0;
  /// Sample count and seed for monte_carlo.
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  /// Absolute error bound on log_z (0 for closed forms; relative quadrature
  /// error for 1D; standard error of the log for Monte Carlo).
  double error_estimate = 0.0;

  std::string method_name() const;
};

struct IntegrationConfig {
  /// Relative accuracy target for 1D quadrature.
  double rel_tol = 1e-8;
  /// Importance-sampling budget for d >= 2.
  std::uint64_t mc_samples = std::uint64_t{1} << 20;
  std::uint64_t seed = 0;
  /// Maximum number of compositions enumerated for r = 1/n.
  std::uint64_t composition_cap = 1'000'000;
  /// Relative standard-error target for importance sampling.
  double mc_rel_tol = 1e-2;

  /// Throws InvalidInput unless rel_tol > 0, mc_rel_tol > 0 and
  /// mc_samples >= 2^10.
  void validate() const;
};

/// Closed-form log Z_{k,0} (uniform weights 1/k).
NormalizationResult log_z_geometric(std::span<const GaussianDensity> gaussians);

/// Closed-form log Z_{k,1/n}: logsumexp over weak compositions of n into k
/// parts of log multinomial + log integral(weights n_i / n), minus n log k.
/// Throws CapacityError when C(n + k - 1, k - 1) exceeds `composition_cap`.
NormalizationResult log_z_reciprocal(std::span<const GaussianDensity> gaussians, unsigned n,
                                     std::uint64_t composition_cap = 1'000'000);

/// Numerical log Z_{k,r}: adaptive Gauss-Kronrod for d = 1, importance
/// sampling from the uniform mixture of the inputs for d >= 2. Throws
/// AccuracyError (with the best estimate) when the target is missed.
NormalizationResult log_z_numeric(std::span<const GaussianDensity> gaussians, PowerOrder order,
                                  const IntegrationConfig& cfg = {});

/// Closed form when one exists (r = 0, or r = 1/n within the composition
/// cap), otherwise log_z_numeric.
NormalizationResult log_z(std::span<const GaussianDensity> gaussians, PowerOrder order,
                          const IntegrationConfig& cfg = {});

/// n such that r == 1/n exactly, or 0 when r is not a unit fraction.
unsigned reciprocal_integer(PowerOrder order);

/// log pbar_{k,r}(x) = log M_{k,r}(x) - log Z. Throws InvalidInput when
/// `norm` was computed for a different order or dimensions disagree.
double aggregated_log_density(std::span<const GaussianDensity> gaussians, PowerOrder order,
                              const NormalizationResult& norm, const Eigen::Ref<const Eigen::VectorXd>& x);

/// log M_{k,r}(x) minus the mean of the individual log-densities at x, i.e.
/// the gap before normalization. Adding -log Z gives wisdom_gap_continuous.
double jensen_gap_continuous(std::span<const GaussianDensity> gaussians, PowerOrder order,
                             const Eigen::Ref<const Eigen::VectorXd>& x);

/// log pbar_{k,r}(x) minus the mean of the individual log-densities at x.
double wisdom_gap_continuous(std::span<const GaussianDensity> gaussians, PowerOrder order,
                             const NormalizationResult& norm, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Unnormalized gap log M_{2,r}(m) - mean log p_i(m) for the pair
/// N(-m, 1), N(m, 1): (1/r) log((1 + exp(-2 r m^2)) / 2) + m^2.
/// Requires r < 0 and m > 0.
double counterexample_gap_formula(double m, double r);

struct NllEstimate {
  double nll = 0.0;
  double stderr_nll = 0.0;
};

NllEstimate estimate_nll(std::span<const GaussianDensity> gaussians, PowerOrder order,
                         const NormalizationResult& norm, std::span<const Eigen::VectorXd> samples);

/// Deterministic draws mu + L z with z ~ N(0, I) from std::mt19937_64(seed).
std::vector<Eigen::VectorXd> sample_gaussian(const GaussianDensity& g, std::size_t count, std::uint64_t seed);

}  // namespace genmean
