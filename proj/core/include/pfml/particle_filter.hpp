#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pfml/dataset.hpp"
#include "pfml/model.hpp"
#include "pfml/particle_system.hpp"
#include "pfml/rng.hpp"

namespace pfml {

/// Multinomial resampling: `count` i.i.d. draws from Categorical(weights).
/// Weights are unnormalized and non-negative. `step` is reported in the
/// WeightDegeneracy error raised when no weight is positive or any is NaN.
std::vector<std::uint32_t> categorical_resample(std::span<const double> weights,
                                                std::size_t count, RngStream& rng,
                                                std::size_t step = 0);

/// Proposal q(x_t | x_{t-1}, y_t) for the auxiliary particle filter. Its
/// support must cover that of the transition density.
struct Proposal {
  std::function<void(std::span<const double> x_prev, std::span<const double> y, std::size_t t,
                     RngStream& rng, std::span<double> x_next)>
      sample;
  std::function<double(std::span<const double> x_next, std::span<const double> x_prev,
                       std::span<const double> y, std::size_t t)>
      logdensity;
};

/// log nu_t^n as a function of the particle, its log-weight and t.
using ResamplingLogWeight =
    std::function<double(std::span<const double> x, double log_w, std::size_t t)>;

enum class WeightMode {
  kBootstrap,  ///< q = f_theta, nu = w
  kCustom,     ///< user proposal and resampling weights
};

struct ApfConfig {
  std::size_t num_particles = 100;
  WeightMode mode = WeightMode::kBootstrap;
  /// Used in kCustom mode; an empty proposal falls back to the transition.
  Proposal proposal;
  /// Used in kCustom mode; empty means nu = w.
  ResamplingLogWeight resampling_logweight;

  static ApfConfig bootstrap(std::size_t num_particles);
};

struct ApfResult {
  double loglik;
  ParticleSystem system;
};

/// Auxiliary particle filter with weights
///
///   w_t^n = [(w_{t-1}^a / sum_j w_{t-1}^j) / (nu_{t-1}^a / sum_j nu_{t-1}^j)]
///           * f_theta(x_t^n | x_{t-1}^a) / q(x_t^n | x_{t-1}^a, y_t) * g_theta(y_t | x_t^n),
///
/// a = a_t^n, evaluated in log space. Resamples every step.
ApfResult run_apf(const StateSpaceModel& model, const ParamVector& theta, const ApfConfig& cfg,
                  const Dataset& data, RngStream rng);

/// Bootstrap filter at theta_ref with every random outcome recorded.
/// online_logweights[t][n] = log g_{theta_ref}(y_t | x_t^n) for t >= 1, 0 at t = 0.
ParticleSystem run_frozen_bootstrap(const StateSpaceModel& model, const ParamVector& theta_ref,
                                    std::size_t num_particles, const Dataset& data,
                                    RngStream rng);

}  // namespace pfml
