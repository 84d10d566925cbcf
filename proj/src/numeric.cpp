#include "genmean/numeric.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>
#include <cctype>

#include "genmean/errors.hpp"

namespace genmean {

namespace {

constexpr std::size_t kPairwiseLeaf = 8;

double pairwise_sum_impl(const double* data, std::size_t n) {
  if (n <= kPairwiseLeaf) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_impl(data, half) + pairwise_sum_impl(data + half, n - half);
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  return pairwise_sum_impl(values.data(), values.size());
}

double logsumexp(std::span<const double> values) {
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  if (values.empty()) return neg_inf;
  const double shift = *std::max_element(values.begin(), values.end());
  if (shift == neg_inf) return neg_inf;
  if (std::isinf(shift) || std::isnan(shift)) return shift;

  // Small spans stay on the stack; this sits on hot paths.
  std::array<double, 64> small;
  std::vector<double> large;
  double* buf = small.data();
  if (values.size() > small.size()) {
    large.resize(values.size());
    buf = large.data();
  }
  for (std::size_t i = 0; i < values.size(); ++i) buf[i] = std::exp(values[i] - shift);
  return shift + std::log(pairwise_sum_impl(buf, values.size()));
}

double log_add_exp(double a, double b) noexcept {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  const auto n = values.size();
  if (n == 0) return out;
  out.mean = pairwise_sum(values) / static_cast<double>(n);
  if (n < 2) return out;
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = values[i] - out.mean;
    sq[i] = d * d;
  }
  out.stddev = std::sqrt(pairwise_sum(sq) / static_cast<double>(n - 1));
  out.stderr_mean = out.stddev / std::sqrt(static_cast<double>(n));
  return out;
}

std::string format_exact(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "+inf" : "-inf";
  std::array<char, 64> buf;
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

std::string format_12g(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "+inf" : "-inf";
  std::array<char, 64> buf;
  const int len = std::snprintf(buf.data(), buf.size(), "%.12g", value);
  return std::string(buf.data(), static_cast<std::size_t>(len));
}

double parse_double(std::string_view text) {
  std::string_view t = text;
  while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front()))) t.remove_prefix(1);
  while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.remove_suffix(1);
  if (iequals(t, "inf") || iequals(t, "+inf") || iequals(t, "infinity") || iequals(t, "+infinity"))
    return std::numeric_limits<double>::infinity();
  if (iequals(t, "-inf") || iequals(t, "-infinity")) return -std::numeric_limits<double>::infinity();
  if (iequals(t, "nan")) return std::numeric_limits<double>::quiet_NaN();

  std::string_view body = t;
  if (!body.empty() && body.front() == '+') {
    body.remove_prefix(1);
    if (!body.empty() && body.front() == '-') body = {};
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (body.empty() || ec != std::errc() || ptr != body.data() + body.size())
    throw InvalidInput("not a number: '" + std::string(text) + "'");
  return value;
}

}  // namespace genmean
