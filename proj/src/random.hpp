#pragma once

// Portable draws on top of mt19937_64. The standard distributions are
// implementation-defined, which would make seeded output differ between
// standard libraries.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace lcdur::rng {

/// Uniform on the open interval (0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& gen) {
  return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform01(gen);
}

/// Integer in [lo, hi].
inline std::int64_t uniform_int(std::mt19937_64& gen, std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(gen() % span);
}

/// Box-Muller, one value per call.
inline double standard_normal(std::mt19937_64& gen) {
  const double u1 = uniform01(gen);
  const double u2 = uniform01(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace lcdur::rng
