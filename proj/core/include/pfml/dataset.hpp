#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pfml/param.hpp"

namespace pfml {

struct SeedInfo {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  friend bool operator==(const SeedInfo&, const SeedInfo&) = default;
};

/// Observations y_{1:T}, optionally with the simulated trajectory x_{0:T}.
/// Storage is row-major; time indices in accessors are the model's (1-based
/// for observations, 0-based for states).
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t obs_dim, std::vector<double> observations);

  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t obs_dim() const noexcept { return obs_dim_; }

  /// y_t for t in 1..T.
  std::span<const double> obs(std::size_t t) const;
  std::span<const double> observations() const noexcept { return y_; }

  bool has_trajectory() const noexcept { return x_.has_value(); }
  std::size_t state_dim() const noexcept { return state_dim_; }
  /// x_t for t in 0..T. Throws if no trajectory is stored.
  std::span<const double> state(std::size_t t) const;
  void set_trajectory(std::size_t state_dim, std::vector<double> states);
  std::span<const double> trajectory() const;

  std::optional<ParamVector> theta_true;
  std::optional<SeedInfo> seed;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t horizon_ = 0;
  std::size_t obs_dim_ = 0;
  std::size_t state_dim_ = 0;
  std::vector<double> y_;
  std::optional<std::vector<double>> x_;
};

}  // namespace pfml
