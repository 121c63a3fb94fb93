#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfml/param.hpp"
#include "pfml/rng.hpp"

namespace pfml {

/// State-space model contract:
///
///   x_0 ~ p(x_0),   x_t | x_{t-1} ~ f_theta(. | x_{t-1}),   y_t | x_t ~ g_theta(. | x_t)
///
/// Steps run t = 1..T. Exogenous inputs are absorbed through `t`. The initial
/// distribution never sees theta. Implementations must be immutable after
/// construction; every method is called concurrently from worker threads.
class StateSpaceModel {
 public:
  virtual ~StateSpaceModel() = default;

  virtual std::string name() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t obs_dim() const = 0;
  virtual std::size_t param_dim() const = 0;
  virtual std::vector<std::string> param_names() const = 0;
  virtual std::vector<Transform> param_transforms() const = 0;

  virtual void init_sample(RngStream& rng, std::span<double> x0) const = 0;
  virtual void trans_sample(const ParamVector& theta, std::span<const double> x_prev,
                            std::size_t t, RngStream& rng, std::span<double> x_next) const = 0;
  virtual double trans_logdensity(const ParamVector& theta, std::span<const double> x_next,
                                  std::span<const double> x_prev, std::size_t t) const = 0;
  virtual void obs_sample(const ParamVector& theta, std::span<const double> x, std::size_t t,
                          RngStream& rng, std::span<double> y) const = 0;
  virtual double obs_logdensity(const ParamVector& theta, std::span<const double> y,
                                std::span<const double> x, std::size_t t) const = 0;

  /// Exogenous signal u_t, if the model has one.
  virtual std::optional<std::vector<double>> input(std::size_t t) const;

  /// Batched log f_theta over N particles stored row-major (N x state_dim).
  /// The default loops over trans_logdensity; models override to hoist
  /// theta-only terms.
  virtual void trans_logdensity_batch(const ParamVector& theta, std::size_t t,
                                      std::span<const double> x_next,
                                      std::span<const double> x_prev,
                                      std::span<double> out) const;
  /// Batched log g_theta(y_t | x^n) over N particles.
  virtual void obs_logdensity_batch(const ParamVector& theta, std::size_t t,
                                    std::span<const double> y, std::span<const double> x,
                                    std::span<double> out) const;

  /// Natural-space parameter vector carrying this model's transform tags.
  ParamVector make_params(std::vector<double> values) const;
  /// Throws if theta has the wrong length or violates a transform tag.
  void check_params(const ParamVector& theta) const;
};

using ModelPtr = std::shared_ptr<const StateSpaceModel>;

}  // namespace pfml
