#include "pfml/model.hpp"

#include "pfml/errors.hpp"

namespace pfml {

std::optional<std::vector<double>> StateSpaceModel::input(std::size_t) const {
  return std::nullopt;
}

void StateSpaceModel::trans_logdensity_batch(const ParamVector& theta, std::size_t t,
                                             std::span<const double> x_next,
                                             std::span<const double> x_prev,
                                             std::span<double> out) const {
  const std::size_t nx = state_dim();
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = trans_logdensity(theta, x_next.subspan(n * nx, nx), x_prev.subspan(n * nx, nx), t);
  }
}

void StateSpaceModel::obs_logdensity_batch(const ParamVector& theta, std::size_t t,
                                           std::span<const double> y, std::span<const double> x,
                                           std::span<double> out) const {
  const std::size_t nx = state_dim();
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = obs_logdensity(theta, y, x.subspan(n * nx, nx), t);
  }
}

ParamVector StateSpaceModel::make_params(std::vector<double> values) const {
  ParamVector theta(std::move(values), param_transforms());
  check_params(theta);
  return theta;
}

void StateSpaceModel::check_params(const ParamVector& theta) const {
  if (theta.size() != param_dim()) {
    throw Error(name() + ": expected " + std::to_string(param_dim()) + " parameters, got " +
                std::to_string(theta.size()));
  }
  theta.validate();
}

}  // namespace pfml
