#include "genmean/combinatorics.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <algorithm>
#include <vector>

#include "genmean/errors.hpp"

namespace genmean {

double composition_count(unsigned n, unsigned k) {
  if (k == 0) throw PreconditionError("composition into zero parts");
  // C(n + k - 1, m) with m = min(n, k - 1), multiplied incrementally.
  const unsigned m = std::min(n, k - 1);
  double c = 1.0;
  for (unsigned i = 1; i <= m; ++i) c = c * static_cast<double>(n + k - 1 - m + i) / static_cast<double>(i);
  return std::round(c);
}

double log_multinomial(std::span<const unsigned> parts) {
  unsigned long long n = 0;
  double denom = 0.0;
  for (unsigned p : parts) {
    n += p;
    denom += std::lgamma(static_cast<double>(p) + 1.0);
  }
  return std::lgamma(static_cast<double>(n) + 1.0) - denom;
}

std::optional<std::uint64_t> multinomial_exact(std::span<const unsigned> parts) {
  // Product of binomials C(n_1 + ... + n_j, n_j), each built with exact
  // division so intermediates stay integral.
  std::uint64_t result = 1;
  std::uint64_t total = 0;
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  for (unsigned p : parts) {
    std::uint64_t binom = 1;
    for (unsigned i = 1; i <= p; ++i) {
      // binom * (total + i) / i, reduced by gcd so the division is exact.
      const std::uint64_t g = std::gcd(binom, std::uint64_t{i});
      const std::uint64_t factor = (total + i) / (i / g);
      const std::uint64_t reduced = binom / g;
      if (factor != 0 && reduced > kMax / factor) return std::nullopt;
      binom = reduced * factor;
    }
    total += p;
    if (binom != 0 && result > kMax / binom) return std::nullopt;
    result *= binom;
  }
  return result;
}

void for_each_composition(unsigned n, unsigned k,
                          const std::function<void(std::span<const unsigned>)>& visit) {
  if (k == 0) throw PreconditionError("composition into zero parts");
  std::vector<unsigned> a(k, 0);
  a[0] = n;
  while (true) {
    visit(a);
    if (k == 1 || n == 0) return;
    std::size_t i = 0;
    while (a[i] == 0) ++i;
    if (i == k - 1) return;
    const unsigned v = a[i];
    a[i] = 0;
    a[0] = v - 1;
    a[i + 1] += 1;
  }
}

}  // namespace genmean
