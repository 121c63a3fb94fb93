#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "pfml/param.hpp"

namespace pfml {

/// Maps theta to the optimizer's unconstrained space (log for kLogPositive).
/// For values in the image of from_unconstrained the round trip is bit-exact.
std::vector<double> to_unconstrained(const ParamVector& theta);
ParamVector from_unconstrained(std::span<const double> v, std::span<const Transform> tags);

enum class OptMethod { kSimplex, kQuasiNewtonFd };

enum class Termination {
  kXTolerance,
  kFTolerance,
  kGradientTolerance,
  kMaxEvals,
  kLineSearchFailed,
};

std::string_view to_string(OptMethod m) noexcept;
std::string_view to_string(Termination t) noexcept;

struct OptimizerConfig {
  OptMethod method = OptMethod::kSimplex;
  std::size_t max_evals = 400;
  double x_tolerance = 1e-6;
  double f_tolerance = 1e-8;
  /// Initial simplex steps in unconstrained space. Empty: max(0.1|v_i|, 0.1).
  std::vector<double> initial_step;

  void validate(std::size_t dim) const;
};

struct OptResult {
  ParamVector argmax;
  double value;
  std::size_t evals_used;
  bool converged;
  Termination termination;
};

/// A deterministic objective. -inf is a valid value (ordered below every real);
/// NaN is an error.
using Objective = std::function<double(const ParamVector&)>;

/// Maximizes `objective` starting at theta_init. The simplex method is
/// Nelder-Mead in unconstrained space with lowest-index tie-breaking, so equal
/// inputs give equal results. The returned value is never below
/// objective(theta_init). Throws if objective(theta_init) is -inf or any
/// evaluation returns NaN.
OptResult maximize(const Objective& objective, const ParamVector& theta_init,
                   const OptimizerConfig& cfg = {});

}  // namespace pfml
