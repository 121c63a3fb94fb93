#include "pfml/particle_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pfml/errors.hpp"
#include "pfml/numeric.hpp"

namespace pfml {
namespace {

void check_inputs(const StateSpaceModel& model, const ParamVector& theta, std::size_t n,
                  const Dataset& data) {
  if (n < 1) throw Error("particle filter: N must be at least 1");
  if (n > std::numeric_limits<std::uint32_t>::max()) throw Error("particle filter: N too large");
  if (data.horizon() < 1) throw Error("particle filter: dataset is empty");
  if (data.obs_dim() != model.obs_dim()) {
    throw Error("particle filter: dataset obs_dim does not match the model");
  }
  model.check_params(theta);
}

// Normalized natural-space resampling weights from log-weights.
void exp_shifted(std::span<const double> logw, std::span<double> out) {
  const double m = *std::max_element(logw.begin(), logw.end());
  for (std::size_t n = 0; n < logw.size(); ++n) {
    out[n] = std::isfinite(m) ? std::exp(logw[n] - m) : 0.0;
  }
}

void check_density(double v, const char* density, std::size_t t, std::size_t n) {
  if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
    throw NonFiniteDensity(density, t, n);
  }
}

}  // namespace

std::vector<std::uint32_t> categorical_resample(std::span<const double> weights,
                                                std::size_t count, RngStream& rng,
                                                std::size_t step) {
  if (weights.empty()) throw WeightDegeneracy(step);
  std::vector<double> cumulative(weights.size());
  double total = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double w = weights[j];
    if (!(w >= 0.0) || !std::isfinite(w)) throw WeightDegeneracy(step);
    if (w > 0.0) last_positive = j;
    total += w;
    cumulative[j] = total;
  }
  if (!(total > 0.0) || !std::isfinite(total)) throw WeightDegeneracy(step);

  std::vector<std::uint32_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double r = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    const std::size_t j = it == cumulative.end() ? last_positive
                                                 : static_cast<std::size_t>(it - cumulative.begin());
    idx[i] = static_cast<std::uint32_t>(j);
  }
  return idx;
}

ApfConfig ApfConfig::bootstrap(std::size_t num_particles) {
  ApfConfig cfg;
  cfg.num_particles = num_particles;
  cfg.mode = WeightMode::kBootstrap;
  return cfg;
}

ApfResult run_apf(const StateSpaceModel& model, const ParamVector& theta, const ApfConfig& cfg,
                  const Dataset& data, RngStream rng) {
  const std::size_t n_part = cfg.num_particles;
  check_inputs(model, theta, n_part, data);
  const bool custom = cfg.mode == WeightMode::kCustom;
  const bool custom_proposal = custom && static_cast<bool>(cfg.proposal.sample);
  if (custom_proposal && !cfg.proposal.logdensity) {
    throw Error("run_apf: proposal has a sampler but no log-density");
  }
  const bool custom_nu = custom && static_cast<bool>(cfg.resampling_logweight);

  const std::size_t horizon = data.horizon();
  const std::size_t nx = model.state_dim();
  const SeedInfo seed{rng.seed(), rng.stream()};

  std::vector<double> particles((horizon + 1) * n_part * nx);
  std::vector<std::uint32_t> ancestors(horizon * n_part);
  std::vector<double> logw((horizon + 1) * n_part, 0.0);
  std::vector<double> lognu_prev(n_part, 0.0);
  std::vector<double> lognu(n_part);
  std::vector<double> resample_w(n_part);
  std::vector<double> lg(n_part);
  std::span<double> xs(particles);

  for (std::size_t n = 0; n < n_part; ++n) model.init_sample(rng, xs.subspan(n * nx, nx));

  double loglik = 0.0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    const auto y = data.obs(t);
    const auto x_prev_all = xs.subspan((t - 1) * n_part * nx, n_part * nx);
    const auto x_next_all = xs.subspan(t * n_part * nx, n_part * nx);
    const std::span<const double> logw_prev(logw.data() + (t - 1) * n_part, n_part);
    const std::span<double> logw_t(logw.data() + t * n_part, n_part);

    exp_shifted(lognu_prev, resample_w);
    const auto a = categorical_resample(resample_w, n_part, rng, t);
    std::copy(a.begin(), a.end(), ancestors.begin() + static_cast<std::ptrdiff_t>((t - 1) * n_part));

    for (std::size_t n = 0; n < n_part; ++n) {
      const auto x_prev = x_prev_all.subspan(a[n] * nx, nx);
      const auto x_next = x_next_all.subspan(n * nx, nx);
      if (custom_proposal) {
        cfg.proposal.sample(x_prev, y, t, rng, x_next);
      } else {
        model.trans_sample(theta, x_prev, t, rng, x_next);
      }
    }

    model.obs_logdensity_batch(theta, t, y, x_next_all, lg);
    const double lse_w = log_sum_exp(logw_prev);
    const double lse_nu = log_sum_exp(lognu_prev);
    for (std::size_t n = 0; n < n_part; ++n) {
      check_density(lg[n], "obs_logdensity", t, n);
      const std::size_t an = a[n];
      double v = (logw_prev[an] - lse_w) - (lognu_prev[an] - lse_nu);
      if (custom_proposal) {
        const auto x_prev = x_prev_all.subspan(an * nx, nx);
        const auto x_next = x_next_all.subspan(n * nx, nx);
        const double lf = model.trans_logdensity(theta, x_next, x_prev, t);
        const double lq = cfg.proposal.logdensity(x_next, x_prev, y, t);
        check_density(lf, "trans_logdensity", t, n);
        check_density(lq, "proposal logdensity", t, n);
        if (lq == -std::numeric_limits<double>::infinity()) throw NonFiniteDensity("proposal logdensity", t, n);
        v += lf - lq;
      }
      logw_t[n] = v + lg[n];
    }

    const double log_z = log_mean_exp(logw_t);
    if (!std::isfinite(log_z)) throw WeightDegeneracy(t);
    loglik += log_z;

    for (std::size_t n = 0; n < n_part; ++n) {
      if (custom_nu) {
        lognu[n] = cfg.resampling_logweight(x_next_all.subspan(n * nx, nx), logw_t[n], t);
        check_density(lognu[n], "resampling weight", t, n);
      } else {
        lognu[n] = logw_t[n];
      }
    }
    std::swap(lognu, lognu_prev);
  }

  ParticleSystem system(theta, n_part, horizon, nx, std::move(particles), std::move(ancestors),
                        std::move(logw), loglik, seed);
  return ApfResult{loglik, std::move(system)};
}

ParticleSystem run_frozen_bootstrap(const StateSpaceModel& model, const ParamVector& theta_ref,
                                    std::size_t num_particles, const Dataset& data,
                                    RngStream rng) {
  check_inputs(model, theta_ref, num_particles, data);
  const std::size_t n_part = num_particles;
  const std::size_t horizon = data.horizon();
  const std::size_t nx = model.state_dim();
  const SeedInfo seed{rng.seed(), rng.stream()};

  std::vector<double> particles((horizon + 1) * n_part * nx);
  std::vector<std::uint32_t> ancestors(horizon * n_part);
  std::vector<double> logw((horizon + 1) * n_part, 0.0);
  std::vector<double> resample_w(n_part);
  std::span<double> xs(particles);

  for (std::size_t n = 0; n < n_part; ++n) model.init_sample(rng, xs.subspan(n * nx, nx));

  double loglik = 0.0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    const std::span<const double> logw_prev(logw.data() + (t - 1) * n_part, n_part);
    const std::span<double> logw_t(logw.data() + t * n_part, n_part);
    const auto x_prev_all = xs.subspan((t - 1) * n_part * nx, n_part * nx);
    const auto x_next_all = xs.subspan(t * n_part * nx, n_part * nx);

    exp_shifted(logw_prev, resample_w);
    const auto a = categorical_resample(resample_w, n_part, rng, t);
    std::copy(a.begin(), a.end(), ancestors.begin() + static_cast<std::ptrdiff_t>((t - 1) * n_part));
    for (std::size_t n = 0; n < n_part; ++n) {
      model.trans_sample(theta_ref, x_prev_all.subspan(a[n] * nx, nx), t, rng,
                         x_next_all.subspan(n * nx, nx));
    }
    model.obs_logdensity_batch(theta_ref, t, data.obs(t), x_next_all, logw_t);
    for (std::size_t n = 0; n < n_part; ++n) check_density(logw_t[n], "obs_logdensity", t, n);

    const double log_z = log_mean_exp(logw_t);
    if (!std::isfinite(log_z)) throw WeightDegeneracy(t);
    loglik += log_z;
  }

  return ParticleSystem(theta_ref, n_part, horizon, nx, std::move(particles),
                        std::move(ancestors), std::move(logw), loglik, seed);
}

}  // namespace pfml
