#include "pfml/numeric.hpp"

#include <algorithm>
#include <limits>

namespace pfml {

double log_sum_exp(std::span<const double> v) noexcept {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double log_mean_exp(std::span<const double> v) noexcept {
  return log_sum_exp(v) - std::log(static_cast<double>(v.size()));
}

}  // namespace pfml
