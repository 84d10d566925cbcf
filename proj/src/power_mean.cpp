#include "genmean/power_mean.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "genmean/errors.hpp"
#include "genmean/numeric.hpp"

namespace genmean {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Beyond this |r log a| the expm1 form loses its advantage and risks overflow.
constexpr double kExpm1Limit = 1.0;

}  // namespace

namespace detail {

double log_power_mean_inplace(std::span<double> v, PowerOrder order, ZeroPolicy zeros) {
  if (v.empty()) throw PreconditionError("power mean of an empty input");
  for (double x : v) {
    if (std::isnan(x)) throw InvalidInput("power mean input is NaN");
    if (x == std::numeric_limits<double>::infinity()) throw InvalidInput("power mean log input is +inf");
    if (x == kNegInf && zeros == ZeroPolicy::reject) throw InvalidInput("power mean input is zero");
  }
  std::sort(v.begin(), v.end());
  const double lo = v.front();
  const double hi = v.back();

  if (order.is_neg_inf()) return lo;
  if (order.is_pos_inf()) return hi;

  const double r = order.value();
  const double k = static_cast<double>(v.size());

  if (r <= 0.0 && lo == kNegInf) return kNegInf;
  if (hi == kNegInf) return kNegInf;
  if (r == 0.0) return pairwise_sum(v) / k;

  const double max_abs = std::max(std::abs(r * hi), lo == kNegInf ? 0.0 : std::abs(r * lo));
  if (max_abs <= kExpm1Limit) {
    for (double& x : v) x = std::expm1(r * x);
    return std::log1p(pairwise_sum(v) / k) / r;
  }
  for (double& x : v) x *= r;
  return (logsumexp(v) - std::log(k)) / r;
}

}  // namespace detail

double log_power_mean(std::span<const double> logs, PowerOrder order, ZeroPolicy zeros) {
  std::vector<double> scratch(logs.begin(), logs.end());
  return detail::log_power_mean_inplace(scratch, order, zeros);
}

double power_mean(std::span<const double> values, PowerOrder order) {
  std::vector<double> logs(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) throw InvalidInput("power_mean requires strictly positive values");
    logs[i] = std::log(values[i]);
  }
  return std::exp(detail::log_power_mean_inplace(logs, order));
}

}  // namespace genmean
