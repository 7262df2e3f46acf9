#pragma once

// Portable seeded randomness. std::mt19937_64 is bit-specified by the
// standard; the std:: distributions are not, so uniforms are built from raw
// engine output and normal quantiles come from Boost.Math's erfc_inv.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

namespace citetail {

inline constexpr std::string_view kRngAlgorithm = "mt19937_64/splitmix64/erfc_inv";

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seed of the independent substream named `key` under `master`.
inline std::uint64_t substream_seed(std::uint64_t master, std::string_view key) {
  std::uint64_t state = master ^ fnv1a64(key);
  splitmix64(state);
  return splitmix64(state);
}

/// Uniform double in the open interval (0, 1) from the top 53 bits.
inline double to_unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

enum class Sampling { Stratified, Independent };

/// n uniforms in (0,1). Stratified draws put exactly one value in each
/// interval [k/n, (k+1)/n), in order of k.
inline std::vector<double> draw_uniforms(std::uint64_t seed, std::uint64_t n, Sampling sampling) {
  std::mt19937_64 engine(seed);
  std::vector<double> u(n);
  const double width = n ? 1.0 / static_cast<double>(n) : 0.0;
  for (std::uint64_t k = 0; k < n; ++k) {
    double v = to_unit_open(engine());
    u[k] = sampling == Sampling::Stratified ? (static_cast<double>(k) + v) * width : v;
  }
  return u;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// z with Phi(z) = p.
inline double normal_quantile(double p) {
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

/// z with 1 - Phi(z) = q; accurate for tiny q.
inline double normal_upper_quantile(double q) {
  return std::sqrt(2.0) * boost::math::erfc_inv(2.0 * q);
}

}  // namespace citetail
