#include "pfml/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "pfml/errors.hpp"

namespace pfml {

Dataset simulate(const StateSpaceModel& model, const ParamVector& theta, std::size_t horizon,
                 RngStream rng) {
  if (horizon < 1) throw Error("simulate: T must be at least 1");
  model.check_params(theta);
  const std::size_t nx = model.state_dim();
  const std::size_t ny = model.obs_dim();
  const SeedInfo seed{rng.seed(), rng.stream()};

  std::vector<double> x((horizon + 1) * nx);
  std::vector<double> y(horizon * ny);
  std::span<double> xs(x);
  std::span<double> ys(y);

  model.init_sample(rng, xs.first(nx));
  for (std::size_t t = 1; t <= horizon; ++t) {
    auto prev = xs.subspan((t - 1) * nx, nx);
    auto next = xs.subspan(t * nx, nx);
    model.trans_sample(theta, prev, t, rng, next);
    if (!std::all_of(next.begin(), next.end(), [](double v) { return std::isfinite(v); })) {
      throw Error("simulate: non-finite state at t=" + std::to_string(t) + " for theta=" +
                  to_string(theta));
    }
    model.obs_sample(theta, next, t, rng, ys.subspan((t - 1) * ny, ny));
  }

  Dataset data(ny, std::move(y));
  data.set_trajectory(nx, std::move(x));
  data.theta_true = theta;
  data.seed = seed;
  return data;
}

double log_joint(const StateSpaceModel& model, const ParamVector& theta, const Dataset& data) {
  if (!data.has_trajectory()) throw Error("log_joint: dataset has no state trajectory");
  if (data.state_dim() != model.state_dim() || data.obs_dim() != model.obs_dim()) {
    throw Error("log_joint: dataset dimensions do not match the model");
  }
  double total = 0.0;
  for (std::size_t t = 1; t <= data.horizon(); ++t) {
    total += model.trans_logdensity(theta, data.state(t), data.state(t - 1), t);
    total += model.obs_logdensity(theta, data.obs(t), data.state(t), t);
  }
  return total;
}

}  // namespace pfml
