#pragma once

#include <cstddef>

#include "pfml/dataset.hpp"
#include "pfml/model.hpp"
#include "pfml/rng.hpp"

namespace pfml {

/// Ancestral sampling of x_{0:T} and y_{1:T}. Throws pfml::Error if a state
/// becomes non-finite (message names t and theta).
Dataset simulate(const StateSpaceModel& model, const ParamVector& theta, std::size_t horizon,
                 RngStream rng);

/// sum_t log f_theta(x_t | x_{t-1}) + sum_t log g_theta(y_t | x_t) along the
/// stored trajectory. p(x_0) is not included.
double log_joint(const StateSpaceModel& model, const ParamVector& theta, const Dataset& data);

}  // namespace pfml
