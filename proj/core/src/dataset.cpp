#include "pfml/dataset.hpp"

#include "pfml/errors.hpp"

namespace pfml {

Dataset::Dataset(std::size_t obs_dim, std::vector<double> observations)
    : obs_dim_(obs_dim), y_(std::move(observations)) {
  if (obs_dim_ == 0) throw Error("Dataset: obs_dim must be positive");
  if (y_.empty() || y_.size() % obs_dim_ != 0) {
    throw Error("Dataset: observation count is not a positive multiple of obs_dim");
  }
  horizon_ = y_.size() / obs_dim_;
}

std::span<const double> Dataset::obs(std::size_t t) const {
  if (t < 1 || t > horizon_) throw Error("Dataset::obs: t out of range");
  return std::span<const double>(y_).subspan((t - 1) * obs_dim_, obs_dim_);
}

std::span<const double> Dataset::state(std::size_t t) const {
  if (!x_) throw Error("Dataset has no state trajectory");
  if (t > horizon_) throw Error("Dataset::state: t out of range");
  return std::span<const double>(*x_).subspan(t * state_dim_, state_dim_);
}

void Dataset::set_trajectory(std::size_t state_dim, std::vector<double> states) {
  if (state_dim == 0 || states.size() != (horizon_ + 1) * state_dim) {
    throw Error("Dataset: trajectory must hold T+1 states of state_dim each");
  }
  state_dim_ = state_dim;
  x_ = std::move(states);
}

std::span<const double> Dataset::trajectory() const {
  if (!x_) throw Error("Dataset has no state trajectory");
  return *x_;
}

}  // namespace pfml
