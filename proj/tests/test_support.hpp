#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "genmean/discrete.hpp"

namespace genmean::test {

/// Fresh empty directory under the build tree.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::path(GENMEAN_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Random probability vector with entries bounded away from zero.
inline std::vector<double> random_simplex(std::size_t L, std::mt19937_64& rng, double spread = 3.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<double> p(L);
  double s = 0.0;
  for (auto& x : p) s += (x = std::exp(u(rng)));
  for (auto& x : p) x /= s;
  return p;
}

/// k x L matrix of strictly positive row-stochastic probabilities.
inline std::vector<double> random_prob_rows(std::size_t k, std::size_t L, std::mt19937_64& rng, double spread = 3.0) {
  std::vector<double> out;
  for (std::size_t i = 0; i < k; ++i) {
    const auto row = random_simplex(L, rng, spread);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

inline LogProbMatrix random_matrix(std::size_t k, std::size_t L, std::mt19937_64& rng, double spread = 3.0) {
  return LogProbMatrix::from_probabilities(k, L, random_prob_rows(k, L, rng, spread));
}

/// Power mean evaluated directly in probability space (oracle).
inline double direct_power_mean(const std::vector<double>& a, double r) {
  const double k = static_cast<double>(a.size());
  if (r == 0.0) {
    double prod = 1.0;
    for (double x : a) prod *= std::pow(x, 1.0 / k);
    return prod;
  }
  double s = 0.0;
  for (double x : a) s += std::pow(x, r);
  return std::pow(s / k, 1.0 / r);
}

/// Trapezoid rule on a uniform grid. Spectrally accurate for smooth
/// integrands that decay to zero at both ends.
template <typename F>
double trapezoid(F f, double lo, double hi, std::size_t intervals) {
  const double h = (hi - lo) / static_cast<double>(intervals);
  double s = 0.5 * (f(lo) + f(hi));
  for (std::size_t i = 1; i < intervals; ++i) s += f(lo + h * static_cast<double>(i));
  return s * h;
}

inline double normal_pdf(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace genmean::test
