#pragma once

#include <span>

#include "pfml/dataset.hpp"
#include "pfml/models.hpp"

namespace pfml {

/// Exact log p(y_{1:T}) for a scalar linear-Gaussian model, accumulated from
/// the innovations of the prediction/update recursion. Throws on non-positive
/// standard deviations.
double kalman_loglik(const LgssCoefficients& coeffs, std::span<const double> y);
double kalman_loglik(const LgssModel& model, const ParamVector& theta, const Dataset& data);

}  // namespace pfml
