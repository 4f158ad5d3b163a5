#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace rgreen {

// Seed derivation. Every randomized task owns a stream seeded from
// (master seed, task index) so results do not depend on scheduling.
std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform index in [0, n) by rejection, identical on every platform.
std::size_t uniform_index(Rng& rng, std::size_t n) noexcept;

struct MinimizeResult {
  std::array<double, 2> x{};
  double value = 0.0;
  int iterations = 0;
};

/// Nelder-Mead on a function of two real variables.
MinimizeResult nelder_mead_2d(const std::function<double(double, double)>& fn,
                              std::array<double, 2> start, double step,
                              double xtol = 1e-10, int max_iter = 2000);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Weighted least squares line through (x, y). Empty weights mean unit weights.
LinearFit fit_line(std::span<const double> x, std::span<const double> y,
                   std::span<const double> weights = {});

double mean(std::span<const double> v);
double standard_error(std::span<const double> v);

}  // namespace rgreen
