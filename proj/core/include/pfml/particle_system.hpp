#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pfml/dataset.hpp"
#include "pfml/param.hpp"

namespace pfml {

/// Frozen record of one particle filter run: particles x_{0:T}^n, ancestors
/// a_{1:T}^n, the log-weights computed online and the resulting log-likelihood
/// estimate. Immutable once constructed; validated on construction.
class ParticleSystem {
 public:
  /// `particles` is (T+1) x N x state_dim, `ancestors` is T x N (row t-1 holds
  /// a_t), `online_logweights` is (T+1) x N. Throws pfml::Error on any
  /// shape/range violation or if online_loglik disagrees with the weights.
  ParticleSystem(ParamVector theta_ref, std::size_t num_particles, std::size_t horizon,
                 std::size_t state_dim, std::vector<double> particles,
                 std::vector<std::uint32_t> ancestors, std::vector<double> online_logweights,
                 double online_loglik, SeedInfo seed);

  std::size_t num_particles() const noexcept { return n_; }
  std::size_t horizon() const noexcept { return t_; }
  std::size_t state_dim() const noexcept { return state_dim_; }
  const ParamVector& theta_ref() const noexcept { return theta_ref_; }
  double online_loglik() const noexcept { return online_loglik_; }
  const SeedInfo& seed() const noexcept { return seed_; }

  /// All N particles at step t (t in 0..T), row-major N x state_dim.
  std::span<const double> particles(std::size_t t) const;
  std::span<const double> particle(std::size_t t, std::size_t n) const;
  /// a_t^n for t in 1..T.
  std::span<const std::uint32_t> ancestors(std::size_t t) const;
  /// log w_t^n for t in 0..T.
  std::span<const double> online_logweights(std::size_t t) const;

  std::span<const double> all_particles() const noexcept { return particles_; }
  std::span<const std::uint32_t> all_ancestors() const noexcept { return ancestors_; }
  std::span<const double> all_online_logweights() const noexcept { return logweights_; }

  friend bool operator==(const ParticleSystem&, const ParticleSystem&) = default;

 private:
  ParamVector theta_ref_;
  std::size_t n_;
  std::size_t t_;
  std::size_t state_dim_;
  std::vector<double> particles_;
  std::vector<std::uint32_t> ancestors_;
  std::vector<double> logweights_;
  double online_loglik_;
  SeedInfo seed_;
};

/// sum_{t=1}^T log mean_n exp(logweights[t][n]); the online_loglik invariant.
double loglik_from_logweights(std::span<const double> logweights, std::size_t num_particles,
                              std::size_t horizon);

}  // namespace pfml
