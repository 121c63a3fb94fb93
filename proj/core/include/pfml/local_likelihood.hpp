#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pfml/dataset.hpp"
#include "pfml/model.hpp"
#include "pfml/particle_system.hpp"

namespace pfml {

/// How the ancestor weight of particle n is formed when re-weighting a frozen
/// bootstrap system at a new theta. Both reduce to the uniform weight at
/// theta_ref.
enum class AncestorWeighting {
  /// omega_n = (w^{a_n} / g_ref^{a_n}) / sum_j (w^{a_j} / g_ref^{a_j}).
  /// Sums to one over n; consistent for every theta as N grows.
  kSelfNormalized,
  /// omega_n = (w^{a_n} / sum_j w^{a_j}) / (g_ref^{a_n} / sum_j g_ref^{a_j}) / N.
  /// Sums to one only at theta_ref; its large-N limit is biased elsewhere.
  kRatioOfSums,
};

struct SurfaceValue {
  double loglik;
  /// log z_t for t = 1..T (truncated at the degenerate step, if any).
  std::vector<double> per_step;
  /// First step at which every weight vanished; loglik is -inf then.
  std::optional<std::size_t> degenerate_at;
};

/// Deterministic map theta -> log z_hat over a frozen bootstrap particle
/// system. All theta-independent terms are cached on construction; eval is
/// pure and may be called concurrently.
class LocalLikelihoodSurface {
 public:
  LocalLikelihoodSurface(std::shared_ptr<const ParticleSystem> system, ModelPtr model,
                         const Dataset& data,
                         AncestorWeighting weighting = AncestorWeighting::kSelfNormalized);

  const ParticleSystem& system() const noexcept { return *system_; }
  const StateSpaceModel& model() const noexcept { return *model_; }
  const ParamVector& theta_ref() const noexcept { return theta_ref_; }
  AncestorWeighting weighting() const noexcept { return weighting_; }

  SurfaceValue eval(const ParamVector& theta) const;
  double loglik(const ParamVector& theta) const { return eval(theta).loglik; }
  std::vector<SurfaceValue> eval_grid(std::span<const ParamVector> grid) const;

  // Cached terms, row t-1 for step t. Exposed for tests.
  /// x_{t-1}^{a_t^n} gathered contiguously.
  std::span<const double> ancestor_states(std::size_t t) const;
  /// log f_{theta_ref}(x_t^n | x_{t-1}^{a_t^n}).
  std::span<const double> ref_trans_logdensity(std::size_t t) const;
  /// log g_{theta_ref}(y_{t-1} | x_{t-1}^{a_t^n}); zeros at t = 1.
  std::span<const double> ref_ancestor_obs_logdensity(std::size_t t) const;
  /// log of g_ref^{a_n} / sum_j g_ref^{a_j}, the normalized reference weight
  /// of each resampled ancestor; log(1/N) at t = 1.
  std::span<const double> ref_ancestor_log_share(std::size_t t) const;

 private:
  std::shared_ptr<const ParticleSystem> system_;
  ModelPtr model_;
  ParamVector theta_ref_;
  AncestorWeighting weighting_;
  std::size_t n_;
  std::size_t horizon_;
  std::size_t state_dim_;
  std::size_t obs_dim_;
  std::vector<double> y_;
  std::vector<double> prev_states_;
  std::vector<double> ref_lf_;
  std::vector<double> ref_lg_anc_;
  std::vector<double> ref_log_share_;
};

LocalLikelihoodSurface build_surface(std::shared_ptr<const ParticleSystem> system,
                                     ModelPtr model, const Dataset& data,
                                     AncestorWeighting weighting =
                                         AncestorWeighting::kSelfNormalized);

}  // namespace pfml
