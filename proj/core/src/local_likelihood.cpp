#include "pfml/local_likelihood.hpp"

#include <cmath>
#include <limits>

#include "pfml/errors.hpp"
#include "pfml/numeric.hpp"

namespace pfml {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_density(std::span<const double> v, const char* density, std::size_t t) {
  for (std::size_t n = 0; n < v.size(); ++n) {
    if (std::isnan(v[n]) || v[n] == std::numeric_limits<double>::infinity()) {
      throw NonFiniteDensity(density, t, n);
    }
  }
}

}  // namespace

LocalLikelihoodSurface::LocalLikelihoodSurface(std::shared_ptr<const ParticleSystem> system,
                                               ModelPtr model, const Dataset& data,
                                               AncestorWeighting weighting)
    : system_(std::move(system)), model_(std::move(model)), weighting_(weighting) {
  if (!system_ || !model_) throw Error("build_surface: null system or model");
  const ParticleSystem& sys = *system_;
  if (sys.state_dim() != model_->state_dim()) {
    throw Error("build_surface: system state_dim " + std::to_string(sys.state_dim()) +
                " does not match model state_dim " + std::to_string(model_->state_dim()));
  }
  if (data.obs_dim() != model_->obs_dim()) {
    throw Error("build_surface: dataset obs_dim does not match the model");
  }
  if (data.horizon() != sys.horizon()) {
    throw Error("build_surface: system horizon " + std::to_string(sys.horizon()) +
                " does not match dataset horizon " + std::to_string(data.horizon()));
  }
  if (sys.theta_ref().size() != model_->param_dim()) {
    throw Error("build_surface: theta_ref has the wrong dimension for the model");
  }

  theta_ref_ = sys.theta_ref();
  n_ = sys.num_particles();
  horizon_ = sys.horizon();
  state_dim_ = sys.state_dim();
  obs_dim_ = data.obs_dim();
  y_.assign(data.observations().begin(), data.observations().end());

  prev_states_.resize(horizon_ * n_ * state_dim_);
  ref_lf_.resize(horizon_ * n_);
  ref_lg_anc_.resize(horizon_ * n_);
  ref_log_share_.resize(horizon_ * n_);

  for (std::size_t t = 1; t <= horizon_; ++t) {
    const auto a = sys.ancestors(t);
    const auto lg_prev = sys.online_logweights(t - 1);
    const std::size_t row = (t - 1) * n_;
    double* prev = prev_states_.data() + row * state_dim_;
    for (std::size_t n = 0; n < n_; ++n) {
      const auto src = sys.particle(t - 1, a[n]);
      std::copy(src.begin(), src.end(), prev + n * state_dim_);
      ref_lg_anc_[row + n] = t == 1 ? 0.0 : lg_prev[a[n]];
    }
    const std::span<double> lf(ref_lf_.data() + row, n_);
    model_->trans_logdensity_batch(theta_ref_, t, sys.particles(t), ancestor_states(t), lf);
    for (std::size_t n = 0; n < n_; ++n) {
      if (!std::isfinite(lf[n])) throw NonFiniteDensity("reference trans_logdensity", t, n);
    }
    const std::span<const double> lg_anc(ref_lg_anc_.data() + row, n_);
    const double lse = log_sum_exp(lg_anc);
    for (std::size_t n = 0; n < n_; ++n) ref_log_share_[row + n] = lg_anc[n] - lse;
  }
}

std::span<const double> LocalLikelihoodSurface::ancestor_states(std::size_t t) const {
  return std::span<const double>(prev_states_).subspan((t - 1) * n_ * state_dim_, n_ * state_dim_);
}

std::span<const double> LocalLikelihoodSurface::ref_trans_logdensity(std::size_t t) const {
  return std::span<const double>(ref_lf_).subspan((t - 1) * n_, n_);
}

std::span<const double> LocalLikelihoodSurface::ref_ancestor_obs_logdensity(std::size_t t) const {
  return std::span<const double>(ref_lg_anc_).subspan((t - 1) * n_, n_);
}

std::span<const double> LocalLikelihoodSurface::ref_ancestor_log_share(std::size_t t) const {
  return std::span<const double>(ref_log_share_).subspan((t - 1) * n_, n_);
}

SurfaceValue LocalLikelihoodSurface::eval(const ParamVector& theta) const {
  model_->check_params(theta);
  const double log_n = std::log(static_cast<double>(n_));
  std::vector<double> lw_prev(n_, 0.0), lw(n_), lf(n_), lg(n_), anc(n_);

  SurfaceValue out{0.0, {}, std::nullopt};
  out.per_step.reserve(horizon_);
  for (std::size_t t = 1; t <= horizon_; ++t) {
    const auto a = system_->ancestors(t);
    const auto x_t = system_->particles(t);
    const std::span<const double> y(y_.data() + (t - 1) * obs_dim_, obs_dim_);
    model_->trans_logdensity_batch(theta, t, x_t, ancestor_states(t), lf);
    model_->obs_logdensity_batch(theta, t, y, x_t, lg);
    check_density(lf, "trans_logdensity", t);
    check_density(lg, "obs_logdensity", t);

    // log of the ancestor weight omega_t^n times N
    if (weighting_ == AncestorWeighting::kSelfNormalized) {
      const auto lg_anc = ref_ancestor_obs_logdensity(t);
      for (std::size_t n = 0; n < n_; ++n) anc[n] = lw_prev[a[n]] - lg_anc[n];
      const double lse = log_sum_exp(anc);
      if (lse == kNegInf) {
        out.loglik = kNegInf;
        out.degenerate_at = t;
        return out;
      }
      for (std::size_t n = 0; n < n_; ++n) anc[n] = anc[n] - lse + log_n;
    } else {
      const auto log_share = ref_ancestor_log_share(t);
      for (std::size_t n = 0; n < n_; ++n) anc[n] = lw_prev[a[n]];
      const double lse = log_sum_exp(anc);
      if (lse == kNegInf) {
        out.loglik = kNegInf;
        out.degenerate_at = t;
        return out;
      }
      for (std::size_t n = 0; n < n_; ++n) anc[n] = (anc[n] - lse) - log_share[n];
    }

    const auto ref_lf = ref_trans_logdensity(t);
    for (std::size_t n = 0; n < n_; ++n) lw[n] = anc[n] + (lf[n] - ref_lf[n]) + lg[n];

    const double log_z = log_mean_exp(lw);
    if (!std::isfinite(log_z)) {
      out.loglik = kNegInf;
      out.degenerate_at = t;
      return out;
    }
    out.per_step.push_back(log_z);
    out.loglik += log_z;
    std::swap(lw, lw_prev);
  }
  return out;
}

std::vector<SurfaceValue> LocalLikelihoodSurface::eval_grid(std::span<const ParamVector> grid) const {
  if (grid.empty()) throw Error("eval_grid: empty grid");
  std::vector<SurfaceValue> values;
  values.reserve(grid.size());
  for (const auto& theta : grid) values.push_back(eval(theta));
  return values;
}

LocalLikelihoodSurface build_surface(std::shared_ptr<const ParticleSystem> system,
                                     ModelPtr model, const Dataset& data,
                                     AncestorWeighting weighting) {
  return LocalLikelihoodSurface(std::move(system), std::move(model), data, weighting);
}

}  // namespace pfml
