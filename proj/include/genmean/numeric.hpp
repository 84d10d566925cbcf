#pragma once

#include <span>
#include <string>
#include <string_view>

namespace genmean {

/// Pairwise (cascade) summation. The split tree depends only on the length,
/// so results are reproducible for a fixed input order.
double pairwise_sum(std::span<const double> values);

/// log(sum(exp(values))) with a single max shift followed by pairwise
/// summation. Returns -inf for an empty span or when every entry is -inf.
double logsumexp(std::span<const double> values);

/// log(exp(a) + exp(b)) without overflow.
double log_add_exp(double a, double b) noexcept;

struct MeanStd {
  double mean = 0.0;
  /// Sample standard deviation (n - 1 denominator); 0 when n < 2.
  double stddev = 0.0;
  /// stddev / sqrt(n).
  double stderr_mean = 0.0;
};

MeanStd mean_std(std::span<const double> values);

/// Shortest decimal text that parses back to the same double. Non-finite
/// values become "+inf", "-inf" or "nan".
std::string format_exact(double value);

/// printf-style "%.12g" with the same non-finite spellings as format_exact.
std::string format_12g(double value);

/// Strict whole-string decimal parse. Accepts "inf"/"+inf"/"-inf"/"nan"
/// case-insensitively. Throws InvalidInput on anything else.
double parse_double(std::string_view text);

}  // namespace genmean
