#pragma once

#include <cmath>
#include <span>

namespace pfml {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

/// log sum_i exp(v_i) with max-shift. Returns -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> v) noexcept;
/// log((1/N) sum_i exp(v_i)).
double log_mean_exp(std::span<const double> v) noexcept;

inline double gaussian_logpdf(double x, double mean, double stddev) noexcept {
  const double z = (x - mean) / stddev;
  return -kLogSqrt2Pi - std::log(stddev) - 0.5 * z * z;
}

}  // namespace pfml
