#include "pfml/particle_system.hpp"

#include <cmath>

#include "pfml/errors.hpp"
#include "pfml/numeric.hpp"

namespace pfml {

double loglik_from_logweights(std::span<const double> logweights, std::size_t num_particles,
                              std::size_t horizon) {
  double total = 0.0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    total += log_mean_exp(logweights.subspan(t * num_particles, num_particles));
  }
  return total;
}

ParticleSystem::ParticleSystem(ParamVector theta_ref, std::size_t num_particles,
                               std::size_t horizon, std::size_t state_dim,
                               std::vector<double> particles,
                               std::vector<std::uint32_t> ancestors,
                               std::vector<double> online_logweights, double online_loglik,
                               SeedInfo seed)
    : theta_ref_(std::move(theta_ref)),
      n_(num_particles),
      t_(horizon),
      state_dim_(state_dim),
      particles_(std::move(particles)),
      ancestors_(std::move(ancestors)),
      logweights_(std::move(online_logweights)),
      online_loglik_(online_loglik),
      seed_(seed) {
  if (n_ == 0 || t_ == 0 || state_dim_ == 0) {
    throw Error("ParticleSystem: N, T and state_dim must be positive");
  }
  if (particles_.size() != (t_ + 1) * n_ * state_dim_) {
    throw Error("ParticleSystem: particle array has the wrong size");
  }
  if (ancestors_.size() != t_ * n_) throw Error("ParticleSystem: ancestor array has the wrong size");
  if (logweights_.size() != (t_ + 1) * n_) {
    throw Error("ParticleSystem: log-weight array has the wrong size");
  }
  for (std::uint32_t a : ancestors_) {
    if (a >= n_) throw Error("ParticleSystem: ancestor index out of range");
  }
  // w_0 = 1 for every particle.
  for (std::size_t n = 0; n < n_; ++n) {
    if (logweights_[n] != 0.0) throw Error("ParticleSystem: log-weights at t=0 must be zero");
  }
  for (double x : particles_) {
    if (!std::isfinite(x)) throw Error("ParticleSystem: non-finite particle state");
  }
  const double recomputed = loglik_from_logweights(logweights_, n_, t_);
  const bool both_neg_inf = std::isinf(recomputed) && std::isinf(online_loglik_) &&
                            recomputed < 0 && online_loglik_ < 0;
  if (!both_neg_inf &&
      !(std::abs(recomputed - online_loglik_) <= 1e-9 * std::max(1.0, std::abs(recomputed)))) {
    throw Error("ParticleSystem: online_loglik does not match the stored log-weights");
  }
}

std::span<const double> ParticleSystem::particles(std::size_t t) const {
  if (t > t_) throw Error("ParticleSystem::particles: t out of range");
  return std::span<const double>(particles_).subspan(t * n_ * state_dim_, n_ * state_dim_);
}

std::span<const double> ParticleSystem::particle(std::size_t t, std::size_t n) const {
  return particles(t).subspan(n * state_dim_, state_dim_);
}

std::span<const std::uint32_t> ParticleSystem::ancestors(std::size_t t) const {
  if (t < 1 || t > t_) throw Error("ParticleSystem::ancestors: t out of range");
  return std::span<const std::uint32_t>(ancestors_).subspan((t - 1) * n_, n_);
}

std::span<const double> ParticleSystem::online_logweights(std::size_t t) const {
  if (t > t_) throw Error("ParticleSystem::online_logweights: t out of range");
  return std::span<const double>(logweights_).subspan(t * n_, n_);
}

}  // namespace pfml
