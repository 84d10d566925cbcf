#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>

namespace genmean {

/// Number of weak compositions of n into k parts, C(n + k - 1, k - 1), as a
/// double (exact while below 2^53).
double composition_count(unsigned n, unsigned k);

/// log(n! / (n_1! ... n_k!)) via log-gamma.
double log_multinomial(std::span<const unsigned> parts);

/// Exact multinomial coefficient; nullopt when it does not fit in 64 bits.
std::optional<std::uint64_t> multinomial_exact(std::span<const unsigned> parts);

/// Streams every weak composition n_1 + ... + n_k = n in colexicographic
/// order, starting at (n, 0, ..., 0) and ending at (0, ..., 0, n). The span
/// passed to `visit` is only valid during the call.
void for_each_composition(unsigned n, unsigned k,
                          const std::function<void(std::span<const unsigned>)>& visit);

}  // namespace genmean
