#pragma once

#include <span>

#include "genmean/power_order.hpp"

namespace genmean {

/// How zero inputs (log value -inf) are treated.
enum class ZeroPolicy {
  /// Continuous extension: a zero forces the result to zero for r <= 0 and
  /// contributes nothing to the sum for r > 0.
  allow,
  /// Zero inputs raise InvalidInput.
  reject,
};

/// log M_r(a_1..a_k) from the log inputs log a_i, with the exact branches
/// for r = 0 (mean of logs) and r = -inf/+inf (min/max of logs).
///
/// Finite r != 0 uses (logsumexp(r log a) - log k) / r with a max shift; when
/// every |r log a_i| <= 1 the equivalent log1p/expm1 form is used instead so
/// that small |r| does not cancel against log k. Inputs are summed in sorted
/// order, which makes the result independent of the input permutation.
///
/// Throws PreconditionError for an empty span and InvalidInput for NaN or +inf
/// entries.
double log_power_mean(std::span<const double> logs, PowerOrder order,
                      ZeroPolicy zeros = ZeroPolicy::allow);

/// exp(log_power_mean(log values, order)); every value must be > 0.
double power_mean(std::span<const double> values, PowerOrder order);

namespace detail {

/// Same as log_power_mean but reorders `scratch` in place instead of copying.
double log_power_mean_inplace(std::span<double> scratch, PowerOrder order,
                              ZeroPolicy zeros = ZeroPolicy::allow);

}  // namespace detail

}  // namespace genmean
